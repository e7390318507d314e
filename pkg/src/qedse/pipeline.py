"""Run management: per-channel jobs, self-convergence, threading, reports.

Channel jobs are independent; a bounded thread pool runs them concurrently
(the heavy lifting happens in vectorized numerical kernels that release the
interpreter lock).  Every reduction is performed in a fixed order over
sorted channel lists with exact summation, so the assembled report does not
depend on the worker count, and cached rows make interrupted runs resume
to byte-identical output.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

from .cache import ResultCache
from .config import RunConfig
from .dirac import RadialSpectrum
from .greens import one_potential_exact
from .mp_assembly import (
    PartialWaveResult,
    SelfEnergyReport,
    assemble_report,
    to_F_units,
)
from .momentum_terms import momentum_wave, one_potential_term as vertex_term
from .momentum_terms import zero_potential_term
from .photon_pw import ReferenceState, kgrid_level, partial_wave_term, reference_state
from .mp_assembly import extrapolate_tail  # noqa: F401  (re-export for CLI)

log = logging.getLogger(__name__)

__all__ = [
    "reference_for",
    "compute_kappa_row",
    "run_partial_waves",
    "run_momentum_terms",
    "run_report",
    "run_sweep",
]


def reference_for(config: RunConfig, cache: ResultCache) -> ReferenceState:
    spectrum = cache.spectrum(config.basis_spec())
    idx = spectrum.bound_index() + (config.n - abs(config.kappa_ref))
    return reference_state(spectrum, idx)


def _terms_at_level(config: RunConfig, ref: ReferenceState,
                    bound_sp: RadialSpectrum, free_sp: RadialSpectrum,
                    kappa: int, level: int) -> tuple[float, float, float]:
    grid = kgrid_level(level)
    conv = lambda de: to_F_units(de, config.Z, config.n, config.alpha_inv)
    e_bound = conv(partial_wave_term(ref, bound_sp, kappa, grid,
                                     alpha=config.alpha))
    e_zero = conv(partial_wave_term(ref, free_sp, kappa, grid,
                                    alpha=config.alpha))
    e_one = conv(one_potential_exact(ref, free_sp, grid, config.Z,
                                     alpha=config.alpha))
    return e_bound, e_zero, e_one


def compute_kappa_row(config: RunConfig, ref: ReferenceState, kappa: int,
                      cache: ResultCache) -> PartialWaveResult:
    """One channel's quadruple with photon-grid self-convergence.

    The grid ladder is climbed until every term moves by less than
    grid_rtol relative (mp_atol absolute for the assembled difference)
    between consecutive levels, then the finer-level values are kept.
    """
    cached = cache.load_row(config.fingerprint(), kappa)
    if cached is not None:
        return cached
    bound_sp = cache.spectrum(config.basis_spec(kappa=kappa))
    free_sp = cache.spectrum(config.basis_spec(kappa=kappa, Z=0.0))

    level = config.grid_level
    terms = _terms_at_level(config, ref, bound_sp, free_sp, kappa, level)
    levels_used = [level]
    while True:
        finer = _terms_at_level(config, ref, bound_sp, free_sp, kappa, level + 1)
        levels_used.append(level + 1)
        deltas = [abs(a - b) for a, b in zip(terms, finer)]
        scale = max(max(abs(t) for t in finer), 1e-6)
        mp_delta = abs((terms[0] - terms[1] - terms[2])
                       - (finer[0] - finer[1] - finer[2]))
        converged = (max(deltas) <= max(config.grid_rtol * scale, 1e-10)
                     or (mp_delta <= config.mp_atol
                         and max(deltas) <= 1e-6 * scale))
        terms = finer
        level += 1
        if converged or level >= config.max_grid_level:
            if not converged:
                log.warning("kappa=%d photon grid not converged at level %d "
                            "(last change %.1e)", kappa, level, max(deltas))
            break
    row = PartialWaveResult.assemble(
        kappa, *terms,
        {"grid_levels": levels_used, "one_potential": "derivative"})
    cache.store_row(config.fingerprint(), row)
    return row


def run_partial_waves(config: RunConfig, kappas, cache: ResultCache,
                      ref: ReferenceState | None = None) -> list[PartialWaveResult]:
    """All requested channels, scheduled over the configured worker pool."""
    if ref is None:
        ref = reference_for(config, cache)
    kappas = sorted(kappas, key=lambda k: (abs(k), k > 0))
    if config.threads == 1:
        rows = [compute_kappa_row(config, ref, k, cache) for k in kappas]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = {k: pool.submit(compute_kappa_row, config, ref, k, cache)
                       for k in kappas}
            rows = [futures[k].result() for k in kappas]
    return rows


def run_momentum_terms(config: RunConfig, cache: ResultCache) -> tuple[float, float]:
    """Renormalized zero- and one-potential terms of the reference state."""
    spectrum = cache.spectrum(config.basis_spec())
    idx = spectrum.bound_index() + (config.n - abs(config.kappa_ref))
    wave = momentum_wave(spectrum, idx)
    e0 = zero_potential_term(wave)
    e1 = vertex_term(wave, config.Z)
    return e0, e1


def _basis_error_probe(config: RunConfig, cache: ResultCache,
                       rows: list[PartialWaveResult]) -> float:
    """Uniform-per-channel basis-error estimate.

    Re-runs selected channels with n_b reduced by basis_probe_step and
    assumes the same absolute shift for every channel of the series.
    """
    if config.basis_probe_step <= 0:
        return 0.0
    probe_cfg = config.replace(n_b=config.n_b - config.basis_probe_step)
    probe_ref = reference_for(probe_cfg, cache)
    shifts = []
    by_kappa = {r.kappa: r for r in rows}
    for k in (-1, 1):
        if k not in by_kappa:
            continue
        probe_row = compute_kappa_row(probe_cfg, probe_ref, k, cache)
        shifts.append(abs(probe_row.e_mp - by_kappa[k].e_mp))
    if not shifts:
        return 0.0
    per_channel = max(shifts)
    return per_channel * math.sqrt(2.0 * config.kappa_max)


def run_report(config: RunConfig, cache: ResultCache | None = None) -> SelfEnergyReport:
    """Full pipeline: partial waves, tail, momentum terms, uncertainties."""
    cache = cache or ResultCache(config.resolved_cache_dir())
    kappas = [s * k for k in range(1, config.kappa_max + 1) for s in (-1, 1)]
    rows = run_partial_waves(config, kappas, cache)
    e0, e1 = run_momentum_terms(config, cache)
    basis_sigma = _basis_error_probe(config, cache, rows)
    return assemble_report(rows, config.kappa_max, e0, e1, Z=config.Z,
                           alpha_inv=config.alpha_inv, n=config.n,
                           basis_sigma=basis_sigma,
                           fingerprint=config.fingerprint())


def run_sweep(config: RunConfig, nb_list, beta_list, kappa_abs: int,
              cache: ResultCache | None = None) -> list[dict]:
    """Basis-convergence table of the |kappa| pair sum.

    Returns one record per (n_b, beta) with the summed many-potential
    contribution of kappa = -|kappa| and +|kappa|.
    """
    cache = cache or ResultCache(config.resolved_cache_dir())
    records = []
    for beta in beta_list:
        for nb in nb_list:
            cfg = config.replace(n_b=int(nb), beta=float(beta))
            ref = reference_for(cfg, cache)
            rows = run_partial_waves(cfg, (-kappa_abs, kappa_abs), cache, ref)
            pair = math.fsum(r.e_mp for r in rows)
            records.append({"n_b": int(nb), "beta": float(beta),
                            "kappa_abs": kappa_abs, "e_mp_pair": pair})
            log.info("sweep n_b=%d beta=%.2f: pair sum %.8f", nb, beta, pair)
    return records
