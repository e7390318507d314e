"""Run configuration: defaults, flat key=value files, CLI overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .basis import ALPHA_INV_REFERENCE, BasisSpec

__all__ = ["RunConfig", "load_config_file"]

CACHE_DIR_ENV = "QEDSE_CACHE_DIR"


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one self-energy run.

    The defaults reproduce the published ground-state calculation for
    hydrogen-like uranium: Z = 92, alpha^-1 = 137.0359895, an even-tempered
    basis with zeta1 = 0.01 Bohr^-2, beta = 1.5, n_b = 100, and the
    partial-wave series summed to |kappa| = 15.
    """

    Z: float = 92.0
    alpha_inv: float = ALPHA_INV_REFERENCE
    n: int = 1
    kappa_ref: int = -1
    zeta1_bohr: float = 0.01
    beta: float = 1.5
    n_b: int = 100
    kappa_max: int = 15
    delta_z: float = 1e-3
    grid_level: int = 1
    grid_rtol: float = 1e-9
    max_grid_level: int = 3
    mp_atol: float = 5e-8
    basis_probe_step: int = 10
    output_dir: str = "."
    cache_dir: str = ""
    threads: int = 1

    # Keys that affect computed numbers (everything except I/O and
    # scheduling) — the fingerprint and cache keys hash exactly these.
    _PHYSICS_KEYS = ("Z", "alpha_inv", "n", "kappa_ref", "zeta1_bohr", "beta",
                     "n_b", "kappa_max", "delta_z", "grid_level", "grid_rtol",
                     "max_grid_level", "mp_atol", "basis_probe_step")

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("principal quantum number must be >= 1")
        if self.kappa_ref == 0:
            raise ValueError("kappa_ref must be nonzero")
        if self.kappa_max < 1:
            raise ValueError("kappa_max must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def alpha(self) -> float:
        return 1.0 / self.alpha_inv

    def basis_spec(self, kappa: int | None = None, Z: float | None = None) -> BasisSpec:
        return BasisSpec.from_bohr(
            kappa=self.kappa_ref if kappa is None else kappa,
            zeta1_bohr=self.zeta1_bohr, beta_ratio=self.beta, n_b=self.n_b,
            Z=self.Z if Z is None else Z, alpha_inv=self.alpha_inv)

    def fingerprint(self) -> str:
        payload = {k: getattr(self, k) for k in self._PHYSICS_KEYS}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def resolved_cache_dir(self) -> Path:
        if os.environ.get(CACHE_DIR_ENV):
            return Path(os.environ[CACHE_DIR_ENV])
        if self.cache_dir:
            return Path(self.cache_dir)
        return Path(self.output_dir) / "cache"

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    def describe(self) -> dict:
        d = dataclasses.asdict(self)
        d["fingerprint"] = self.fingerprint()
        return d


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    return raw


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Parse a flat key = value file (# comments) over a base config."""
    cfg = base or RunConfig()
    updates = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        updates[key] = _coerce(key, raw.strip())
    return cfg.replace(**updates)
