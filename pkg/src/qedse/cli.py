"""Command-line interface.

Subcommands: spectrum | mp | zero-pot | one-pot | assemble | sweep | compare.
Every RunConfig key can be set in a flat key=value config file and
overridden by a flag of the same name.  Human-readable tables go to stdout,
logs to stderr, machine-readable CSV/JSON into the output directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .cache import ResultCache
from .config import RunConfig, load_config_file
from .mp_assembly import SelfEnergyReport
from .pipeline import (
    compute_kappa_row,
    reference_for,
    run_momentum_terms,
    run_partial_waves,
    run_report,
    run_sweep,
)

log = logging.getLogger("qedse")

CSV_COLUMNS = ("kappa", "e_bound", "e_zero", "e_one", "e_mp")


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    for field in dataclasses.fields(RunConfig):
        flag = "--" + field.name.replace("_", "-")
        kind = {"int": int, "float": float, "str": str}.get(str(field.type), str)
        parser.add_argument(flag, type=kind, default=None,
                            help=f"override {field.name} (default {field.default})")


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config_file(args.config, cfg)
    overrides = {}
    for field in dataclasses.fields(RunConfig):
        val = getattr(args, field.name, None)
        if val is not None:
            overrides[field.name] = val
    return cfg.replace(**overrides) if overrides else cfg


def _write_rows_csv(path: Path, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([r.kappa, _fmt(r.e_bound), _fmt(r.e_zero),
                             _fmt(r.e_one), _fmt(r.e_mp)])


def _print_rows(rows) -> None:
    print(f"{'kappa':>6} {'e_bound':>14} {'e_zero':>14} {'e_one':>14} {'e_mp':>14}")
    for r in rows:
        print(f"{r.kappa:>6d} {r.e_bound:>14.8f} {r.e_zero:>14.8f} "
              f"{r.e_one:>14.8f} {r.e_mp:>14.8f}")


def _parse_kappas(args, config: RunConfig) -> list[int]:
    if args.kappa is not None:
        return [args.kappa]
    kmax = args.kappa_range or config.kappa_max
    return [s * k for k in range(1, kmax + 1) for s in (-1, 1)]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    config = _build_config(args)
    cache = ResultCache(config.resolved_cache_dir())
    z = 0.0 if args.z0 else config.Z
    spec = config.basis_spec(kappa=args.kappa, Z=z)
    spectrum = cache.spectrum(spec)
    print(f"# kappa={args.kappa} Z={z} n_b={config.n_b} "
          f"zeta1={config.zeta1_bohr} Bohr^-2 beta={config.beta}")
    print(f"# energies in mc^2; fingerprint {config.fingerprint()}")
    for i, e in enumerate(spectrum.energies):
        print(f"{i:4d} {e:.10e}")
    idx = spectrum.bound_index()
    print(f"# lowest positive state: index {idx}, "
          f"E = {spectrum.energies[idx]:.10f} mc^2", file=sys.stderr)
    return 0


def cmd_mp(args) -> int:
    config = _build_config(args)
    cache = ResultCache(config.resolved_cache_dir())
    kappas = _parse_kappas(args, config)
    rows = run_partial_waves(config, kappas, cache)
    _print_rows(rows)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows_csv(out / f"partial_waves_{config.fingerprint()}.csv", rows)
    return 0


def cmd_zero_pot(args) -> int:
    config = _build_config(args)
    cache = ResultCache(config.resolved_cache_dir())
    e0, _ = _momentum_cached(config, cache, need_one=False)
    print(f"zero-potential term: {e0:.8f} (F units)")
    return 0


def cmd_one_pot(args) -> int:
    config = _build_config(args)
    cache = ResultCache(config.resolved_cache_dir())
    _, e1 = _momentum_cached(config, cache, need_zero=False)
    print(f"one-potential term: {e1:.8f} (F units)")
    return 0


def _momentum_cached(config, cache, need_zero=True, need_one=True):
    from .momentum_terms import momentum_wave, one_potential_term, zero_potential_term
    spectrum = cache.spectrum(config.basis_spec())
    idx = spectrum.bound_index() + (config.n - abs(config.kappa_ref))
    wave = momentum_wave(spectrum, idx)
    e0 = zero_potential_term(wave) if need_zero else float("nan")
    e1 = one_potential_term(wave, config.Z) if need_one else float("nan")
    return e0, e1


def _report_paths(config: RunConfig) -> tuple[Path, Path]:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = config.fingerprint()
    return out / f"report_{tag}.json", out / f"report_{tag}.csv"


def cmd_assemble(args) -> int:
    config = _build_config(args)
    report = run_report(config)
    json_path, csv_path = _report_paths(config)
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    _write_rows_csv(csv_path, report.per_kappa)
    _print_rows(report.per_kappa)
    print(f"{'tail':>6} {report.tail:>14.8f}  +/- {report.tail_sigma:.1e}")
    print(f"e_mp_total  = {report.e_mp_total:.6f} +/- {report.e_mp_sigma:.6f}")
    print(f"e0_renorm   = {report.e0_renorm:.6f}")
    print(f"e1_renorm   = {report.e1_renorm:.6f}")
    print(f"F_SE        = {report.f_total:.6f} +/- {report.f_sigma:.6f}")
    print(f"wrote {json_path} and {csv_path}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    config = _build_config(args)
    nb_list = [int(x) for x in args.nb_list.split(",")]
    beta_list = [float(x) for x in args.beta_list.split(",")]
    records = run_sweep(config, nb_list, beta_list, args.kappa_abs)
    print(f"{'n_b':>5} {'beta':>6} {'e_mp_pair':>14}")
    for rec in records:
        print(f"{rec['n_b']:>5d} {rec['beta']:>6.2f} {rec['e_mp_pair']:>14.8f}")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep_{config.fingerprint()}.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("n_b", "beta", "kappa_abs", "e_mp_pair"))
        for rec in records:
            writer.writerow([rec["n_b"], rec["beta"], rec["kappa_abs"],
                             _fmt(rec["e_mp_pair"])])
    return 0


def _load_reference(name: str):
    with resources.files("qedse.data").joinpath(name).open() as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def cmd_compare(args) -> int:
    config = _build_config(args)
    report_path = args.report
    if report_path is None:
        report_path = _report_paths(config)[0]
    computed = json.loads(Path(report_path).read_text())
    reference = {int(r["kappa"]): r for r in _load_reference("reference_kappa_rows.csv")}
    print(f"{'kappa':>6} {'term':>8} {'computed':>14} {'reference':>14} {'diff':>12}")
    for row in computed["per_kappa"]:
        k = row["kappa"]
        if k not in reference:
            continue
        for term in ("e_bound", "e_zero", "e_one", "e_mp"):
            ref_val = float(reference[k][term])
            diff = row[term] - ref_val
            print(f"{k:>6d} {term:>8} {row[term]:>14.8f} {ref_val:>14.8f} "
                  f"{diff:>+12.2e}")
    totals = {r["quantity"]: float(r["value"])
              for r in _load_reference("reference_totals.csv")
              if r["source"] == "finite_basis"}
    for key, name in (("e0_renorm", "e0_renorm"), ("e1_renorm", "e1_renorm"),
                      ("e_mp_total", "e_mp_total"), ("f_total", "f_se")):
        if name in totals:
            diff = computed[key] - totals[name]
            print(f"{'total':>6} {key:>11} {computed[key]:>12.6f} "
                  f"{totals[name]:>12.6f} {diff:>+12.2e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qedse",
        description="All-order one-loop self-energy of a hydrogen-like ion "
                    "in an even-tempered Gaussian basis")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="solve and print one radial spectrum")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--z0", action="store_true", help="solve the free (Z=0) problem")
    _add_config_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mp", help="per-channel many-potential rows")
    p.add_argument("--kappa", type=int)
    p.add_argument("--kappa-range", type=int, help="all |kappa| up to this value")
    _add_config_flags(p)
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("zero-pot", help="renormalized zero-potential term")
    _add_config_flags(p)
    p.set_defaults(func=cmd_zero_pot)

    p = sub.add_parser("one-pot", help="renormalized one-potential term")
    _add_config_flags(p)
    p.set_defaults(func=cmd_one_pot)

    p = sub.add_parser("assemble", help="full self-energy report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("sweep", help="basis-convergence sweep of one |kappa| pair")
    p.add_argument("--nb-list", required=True, help="comma-separated n_b values")
    p.add_argument("--beta-list", required=True, help="comma-separated beta values")
    p.add_argument("--kappa-abs", type=int, default=5)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="diff a report against bundled reference values")
    p.add_argument("--report", help="report JSON (default: the configured output)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
