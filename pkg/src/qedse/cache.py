"""Content-addressed cache for spectra and per-channel results.

One file per artifact, named by a hash of everything that determines the
payload: spectra as .npz (JSON header + binary arrays), partial-wave rows
as JSON.  A multi-kappa run killed halfway resumes from the cached rows and
reproduces the final report byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from .basis import BasisSpec
from .dirac import RadialSpectrum, solve_channel
from .mp_assembly import PartialWaveResult

log = logging.getLogger(__name__)

TOOL_VERSION = "qedse-0.1.0"

__all__ = ["ResultCache", "TOOL_VERSION"]


def _spec_key(spec: BasisSpec) -> str:
    blob = json.dumps({
        "tool": TOOL_VERSION,
        "kappa": spec.kappa,
        "zeta1": repr(spec.zeta1),
        "beta": repr(spec.beta_ratio),
        "n_b": spec.n_b,
        "Z": repr(spec.Z),
        "alpha_inv": repr(spec.alpha_inv),
    }, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:20]


class ResultCache:
    """Directory-backed cache; a falsy directory disables caching."""

    def __init__(self, directory: str | Path | None):
        self.dir = Path(directory) if directory else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    # -- spectra ----------------------------------------------------------

    def spectrum(self, spec: BasisSpec) -> RadialSpectrum:
        """Solve a channel through the cache."""
        if self.dir is None:
            return solve_channel(spec)
        path = self.dir / f"spectrum-{_spec_key(spec)}.npz"
        if path.exists():
            log.info("cache hit: spectrum %s (kappa=%d, Z=%g)",
                     path.name, spec.kappa, spec.Z)
            with np.load(path) as data:
                from .basis import build_basis, rkb_small_component
                large = tuple(build_basis(spec))
                small = tuple(rkb_small_component(g, spec.kappa) for g in large)
                return RadialSpectrum(spec=spec,
                                      energies=data["energies"].copy(),
                                      coeffs=data["coeffs"].copy(),
                                      large=large, small=small)
        sp = solve_channel(spec)
        meta = json.dumps({"tool": TOOL_VERSION, "kappa": spec.kappa,
                           "Z": spec.Z, "n_b": spec.n_b})
        np.savez(path, meta=np.frombuffer(meta.encode(), dtype=np.uint8),
                 energies=sp.energies, coeffs=sp.coeffs)
        return sp

    # -- partial-wave rows -------------------------------------------------

    def _row_path(self, fingerprint: str, kappa: int) -> Path:
        return self.dir / f"row-{fingerprint}-k{kappa:+d}.json"

    def load_row(self, fingerprint: str, kappa: int) -> PartialWaveResult | None:
        if self.dir is None:
            return None
        path = self._row_path(fingerprint, kappa)
        if not path.exists():
            return None
        raw = json.loads(path.read_text())
        if raw.get("tool") != TOOL_VERSION:
            return None
        log.info("cache hit: row %s", path.name)
        return PartialWaveResult(kappa=raw["kappa"], e_bound=raw["e_bound"],
                                 e_zero=raw["e_zero"], e_one=raw["e_one"],
                                 e_mp=raw["e_mp"],
                                 diagnostics=raw.get("diagnostics", {}))

    def store_row(self, fingerprint: str, row: PartialWaveResult) -> None:
        if self.dir is None:
            return
        payload = {"tool": TOOL_VERSION, "kappa": row.kappa,
                   "e_bound": row.e_bound, "e_zero": row.e_zero,
                   "e_one": row.e_one, "e_mp": row.e_mp,
                   "diagnostics": row.diagnostics}
        self._row_path(fingerprint, row.kappa).write_text(
            json.dumps(payload, sort_keys=True))
