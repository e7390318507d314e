"""Per-channel many-potential differences, tail extrapolation, F units.

The scaled self-energy function F is defined through

    dE = (alpha/pi) (Z alpha)^4 / n^3 * F * mc^2 ,

so F = dE * pi * n^3 / (alpha (Z alpha)^4) with dE in units of mc^2.  All
table-facing quantities in this module are carried in F units.

The partial-wave series over intermediate-state kappa is summed explicitly
up to kappa_max and the remainder is obtained from a least-squares fit of
the per-|kappa| pair sums to a polynomial in 1/|kappa| starting at the
quadratic term; the fitted model is summed to infinity with Hurwitz zeta
functions.  The spread between fit variants provides the extrapolation
uncertainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .greens import SpectralFamily, one_potential_exact, one_potential_term
from .photon_pw import QuadratureGrid, ReferenceState, partial_wave_term

__all__ = [
    "PartialWaveResult",
    "SelfEnergyReport",
    "to_F_units",
    "from_F_units",
    "many_potential_kappa",
    "extrapolate_tail",
    "assemble_report",
]

TAIL_POWERS = (2, 3, 4)
TAIL_WINDOW = 6


def to_F_units(de: float, Z: float, n: int, alpha_inv: float) -> float:
    """Convert an energy shift in mc^2 to the dimensionless F function."""
    if Z <= 0.0:
        raise ValueError("Z must be positive")
    if n < 1:
        raise ValueError("principal quantum number must be >= 1")
    za = Z / alpha_inv
    return de * math.pi * n ** 3 * alpha_inv / za ** 4


def from_F_units(f: float, Z: float, n: int, alpha_inv: float) -> float:
    za = Z / alpha_inv
    return f * za ** 4 / (math.pi * n ** 3 * alpha_inv)


@dataclass(frozen=True)
class PartialWaveResult:
    """Quadruple of one intermediate-state channel, in F units.

    ``e_mp`` is assembled as e_bound - e_zero - e_one exactly; it is stored
    for serialization but never computed independently.
    """

    kappa: int
    e_bound: float
    e_zero: float
    e_one: float
    e_mp: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @classmethod
    def assemble(cls, kappa: int, e_bound: float, e_zero: float,
                 e_one: float, diagnostics: dict | None = None) -> "PartialWaveResult":
        return cls(kappa=kappa, e_bound=e_bound, e_zero=e_zero, e_one=e_one,
                   e_mp=e_bound - e_zero - e_one,
                   diagnostics=diagnostics or {})


def many_potential_kappa(kappa: int, ref: ReferenceState,
                         bound: SpectralFamily, free: SpectralFamily,
                         grid: QuadratureGrid, *, alpha: float, Z: float,
                         n: int = 1,
                         one_pot: SpectralFamily | None = None) -> PartialWaveResult:
    """Bound, zero- and one-interaction terms for one channel, in F units.

    All three evaluations share the same photon-momentum grid so their
    common quadrature error cancels in the difference.  The
    single-interaction term uses the analytic charge derivative of the
    spectral propagator (exact within the basis); passing a one-potential
    family instead selects the finite-difference route, which carries
    step-size jitter of order 1e-5 and exists for cross-validation.
    """
    alpha_inv = 1.0 / alpha
    conv = lambda de: to_F_units(de, Z, n, alpha_inv)
    e_bound = conv(partial_wave_term(ref, bound, kappa, grid, alpha=alpha))
    e_zero = conv(partial_wave_term(ref, free, kappa, grid, alpha=alpha))
    if one_pot is None:
        e_one = conv(one_potential_exact(ref, free.spectra[kappa], grid, Z,
                                         alpha=alpha))
        diag = {"grid_nodes": grid.size, "one_potential": "derivative"}
    else:
        e_one = conv(one_potential_term(ref, one_pot, kappa, grid, alpha=alpha))
        diag = {"grid_nodes": grid.size, "one_potential": "central_difference",
                "delta_z": one_pot.delta_z}
    return PartialWaveResult.assemble(kappa, e_bound, e_zero, e_one, diag)


def _pair_sums(results: list[PartialWaveResult]) -> dict[int, float]:
    by_kappa = {r.kappa: r.e_mp for r in results}
    sums = {}
    for k in sorted(abs(k) for k in by_kappa if k < 0):
        if k in by_kappa and -k in by_kappa:
            sums[k] = by_kappa[k] + by_kappa[-k]
    return sums


def _fit_tail(ks: np.ndarray, vals: np.ndarray, powers, kappa_max: int) -> float:
    x = 1.0 / ks
    design = np.column_stack([x ** p for p in powers])
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(sum(c * zeta(p, kappa_max + 1) for c, p in zip(coef, powers)))


def extrapolate_tail(results: list[PartialWaveResult],
                     kappa_max: int) -> tuple[float, float]:
    """Remainder of the partial-wave series beyond kappa_max.

    Fits the pair sums s(|kappa|) = e_mp(-|kappa|) + e_mp(+|kappa|) over the
    last TAIL_WINDOW |kappa| values to c2 x^2 + c3 x^3 + c4 x^4 in
    x = 1/|kappa| and sums the model analytically from kappa_max + 1 to
    infinity.  The uncertainty is the largest deviation of three fit
    variants (two-term, three-term, shorter window) from the central value.
    """
    sums = _pair_sums(results)
    if kappa_max not in sums:
        raise ValueError(f"missing results for |kappa| = {kappa_max}")
    window = [k for k in sorted(sums) if k > kappa_max - TAIL_WINDOW]
    if len(window) < 4:
        raise ValueError(
            f"tail fit needs at least 4 pair sums, got {len(window)}")
    ks = np.array(window, dtype=float)
    vals = np.array([sums[k] for k in window])

    central = _fit_tail(ks, vals, TAIL_POWERS, kappa_max)
    variants = [
        _fit_tail(ks, vals, TAIL_POWERS[:2], kappa_max),
        _fit_tail(ks[1:], vals[1:], TAIL_POWERS, kappa_max),
    ]
    spread = max(abs(v - central) for v in variants)
    return central, spread


@dataclass(frozen=True)
class SelfEnergyReport:
    """Complete self-energy budget of one run, all entries in F units."""

    Z: float
    alpha_inv: float
    n: int
    kappa_max: int
    per_kappa: tuple[PartialWaveResult, ...]
    tail: float
    tail_sigma: float
    basis_sigma: float
    e_mp_total: float
    e_mp_sigma: float
    e0_renorm: float
    e1_renorm: float
    f_total: float
    f_sigma: float
    fingerprint: str = ""

    def to_dict(self) -> dict:
        return {
            "Z": self.Z,
            "alpha_inv": self.alpha_inv,
            "n": self.n,
            "kappa_max": self.kappa_max,
            "units": "F(Z alpha), energies dE = (alpha/pi)(Z alpha)^4/n^3 F mc^2",
            "per_kappa": [
                {"kappa": r.kappa, "e_bound": r.e_bound, "e_zero": r.e_zero,
                 "e_one": r.e_one, "e_mp": r.e_mp}
                for r in self.per_kappa
            ],
            "tail": self.tail,
            "tail_sigma": self.tail_sigma,
            "basis_sigma": self.basis_sigma,
            "e_mp_total": self.e_mp_total,
            "e_mp_sigma": self.e_mp_sigma,
            "e0_renorm": self.e0_renorm,
            "e1_renorm": self.e1_renorm,
            "f_total": self.f_total,
            "f_sigma": self.f_sigma,
            "fingerprint": self.fingerprint,
        }


def assemble_report(results: list[PartialWaveResult], kappa_max: int,
                    e0_renorm: float, e1_renorm: float, *, Z: float,
                    alpha_inv: float, n: int = 1, basis_sigma: float = 0.0,
                    fingerprint: str = "") -> SelfEnergyReport:
    """Sum the partial-wave series, extrapolate, and attach the momentum
    terms; f_total = e0_renorm + e1_renorm + e_mp_total by construction."""
    ordered = tuple(sorted(results, key=lambda r: (abs(r.kappa), r.kappa > 0)))
    covered = {r.kappa for r in ordered}
    needed = {s * k for k in range(1, kappa_max + 1) for s in (+1, -1)}
    if not needed <= covered:
        raise ValueError(f"missing channels: {sorted(needed - covered)}")
    tail, tail_sigma = extrapolate_tail(list(ordered), kappa_max)
    e_mp_sum = math.fsum(r.e_mp for r in ordered if abs(r.kappa) <= kappa_max)
    e_mp_total = e_mp_sum + tail
    e_mp_sigma = math.hypot(tail_sigma, basis_sigma)
    f_total = e0_renorm + e1_renorm + e_mp_total
    return SelfEnergyReport(
        Z=Z, alpha_inv=alpha_inv, n=n, kappa_max=kappa_max,
        per_kappa=ordered, tail=tail, tail_sigma=tail_sigma,
        basis_sigma=basis_sigma, e_mp_total=e_mp_total, e_mp_sigma=e_mp_sigma,
        e0_renorm=e0_renorm, e1_renorm=e1_renorm, f_total=f_total,
        f_sigma=e_mp_sigma, fingerprint=fingerprint)
