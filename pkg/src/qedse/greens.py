"""Spectral families entering the many-potential difference.

Three finite-basis realizations of the electron propagator are needed per
intermediate channel: the bound spectrum (full nuclear charge), the free
spectrum (charge switched off), and the single-interaction piece.  The
latter is the charge derivative of the bound propagator at Z = 0 and is
evaluated by central differences in Z: for any functional F linear in the
propagator,

    F[G_one] = Z_nuc * (F[G(+dZ)] - F[G(-dZ)]) / (2 dZ)  + O(dZ^2),

optionally Richardson-extrapolated with the half step, which removes the
O(dZ^2) truncation.  The explicit double-spectral-sum with one potential
insertion is implemented only as a cross-check oracle
(:func:`one_potential_double_sum`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, coulomb_matrix_element
from .dirac import RadialSpectrum, solve_channel
from .photon_pw import QuadratureGrid, ReferenceState, partial_wave_term

log = logging.getLogger(__name__)

__all__ = [
    "SpectralFamily",
    "bound_family",
    "free_family",
    "one_potential_family",
    "one_potential_term",
    "one_potential_exact",
    "one_potential_double_sum",
    "unit_charge_potential",
]

DEFAULT_DELTA_Z = 1e-3
PROBE_RTOL = 1e-6


@dataclass(frozen=True)
class SpectralFamily:
    """Per-kappa spectra of one propagator realization.

    ``kind`` is "bound", "free" or "one_potential".  For the first two,
    ``spectra`` maps kappa to its RadialSpectrum.  The one-potential family
    instead stores spectra at Z = +/- delta_z (and at the half step when
    Richardson extrapolation is requested) together with the physical
    charge that multiplies the derivative.
    """

    kind: str
    spectra: dict[int, RadialSpectrum] = field(default_factory=dict)
    pairs: dict[int, tuple[RadialSpectrum, RadialSpectrum]] = field(default_factory=dict)
    half_pairs: dict[int, tuple[RadialSpectrum, RadialSpectrum]] = field(default_factory=dict)
    delta_z: float = 0.0
    z_nuc: float = 0.0


def _solve_kappas(base: BasisSpec, Z: float, kappas) -> dict[int, RadialSpectrum]:
    return {k: solve_channel(base.replace(kappa=k, Z=Z)) for k in kappas}


def bound_family(base: BasisSpec, kappas) -> SpectralFamily:
    """Bound spectra at the spec's own nuclear charge."""
    return SpectralFamily(kind="bound",
                          spectra=_solve_kappas(base, base.Z, kappas),
                          z_nuc=base.Z)


def free_family(base: BasisSpec, kappas) -> SpectralFamily:
    """Free spectra: identical basis, nuclear charge set to zero."""
    return SpectralFamily(kind="free", spectra=_solve_kappas(base, 0.0, kappas),
                          z_nuc=base.Z)


def one_potential_family(base: BasisSpec, kappas,
                         delta_z: float = DEFAULT_DELTA_Z,
                         richardson: bool = True) -> SpectralFamily:
    """Charge-derivative family from spectra at Z = +/- delta_z (+/- delta_z/2).

    A cheap probe functional (the charge derivative of the lowest
    positive eigenvalue) is compared between the full and half steps; a
    relative disagreement beyond PROBE_RTOL is logged as a warning since it
    signals a poorly chosen delta_z.
    """
    if not 0.0 < delta_z < 0.1:
        raise ValueError("delta_z must lie in (0, 0.1)")
    pairs = {k: (solve_channel(base.replace(kappa=k, Z=+delta_z)),
                 solve_channel(base.replace(kappa=k, Z=-delta_z)))
             for k in kappas}
    half_pairs = {}
    if richardson:
        h = 0.5 * delta_z
        half_pairs = {k: (solve_channel(base.replace(kappa=k, Z=+h)),
                          solve_channel(base.replace(kappa=k, Z=-h)))
                      for k in kappas}
        for k in kappas:
            d_full = _probe_derivative(pairs[k], delta_z)
            d_half = _probe_derivative(half_pairs[k], 0.5 * delta_z)
            scale = max(abs(d_full), abs(d_half), 1e-30)
            if abs(d_full - d_half) > PROBE_RTOL * scale:
                log.warning(
                    "one-potential probe for kappa=%d unstable: dZ and dZ/2 "
                    "derivatives differ by %.2e relative", k,
                    abs(d_full - d_half) / scale)
    return SpectralFamily(kind="one_potential", pairs=pairs,
                          half_pairs=half_pairs, delta_z=delta_z,
                          z_nuc=base.Z)


def _probe_derivative(pair: tuple[RadialSpectrum, RadialSpectrum],
                      h: float) -> float:
    plus, minus = pair
    ep = plus.energies[plus.bound_index()]
    em = minus.energies[minus.bound_index()]
    return (ep - em) / (2.0 * h)


def one_potential_term(ref: ReferenceState, family: SpectralFamily,
                       kappa_n: int, grid: QuadratureGrid, *,
                       alpha: float) -> float:
    """Single-interaction term via the charge derivative.

    Uses the central difference at the family's delta_z, Richardson
    extrapolated when half-step spectra are available, and scales by the
    physical nuclear charge.
    """
    if family.kind != "one_potential":
        raise ValueError(f"expected a one_potential family, got {family.kind!r}")
    h = family.delta_z
    plus, minus = family.pairs[kappa_n]
    d_full = (partial_wave_term(ref, plus, kappa_n, grid, alpha=alpha)
              - partial_wave_term(ref, minus, kappa_n, grid, alpha=alpha)) / (2.0 * h)
    if kappa_n not in family.half_pairs:
        return family.z_nuc * d_full
    hplus, hminus = family.half_pairs[kappa_n]
    d_half = (partial_wave_term(ref, hplus, kappa_n, grid, alpha=alpha)
              - partial_wave_term(ref, hminus, kappa_n, grid, alpha=alpha)) / h
    return family.z_nuc * (4.0 * d_half - d_full) / 3.0


def unit_charge_potential(spectrum: RadialSpectrum, *, alpha: float) -> np.ndarray:
    """Matrix of dV/dZ = -alpha/r in the eigenbasis of a spectrum."""
    nb = spectrum.n_b
    v_p = np.empty((nb, nb))
    v_q = np.empty((nb, nb))
    for i in range(nb):
        for j in range(i, nb):
            v_p[i, j] = v_p[j, i] = -alpha * coulomb_matrix_element(
                spectrum.large[i], spectrum.large[j])
            v_q[i, j] = v_q[j, i] = -alpha * coulomb_matrix_element(
                spectrum.small[i], spectrum.small[j])
    zero = np.zeros((nb, nb))
    v_basis = np.block([[v_p, zero], [zero, v_q]])
    return spectrum.coeffs.T @ v_basis @ spectrum.coeffs


def one_potential_exact(ref: ReferenceState, free_spectrum: RadialSpectrum,
                        grid: QuadratureGrid, z_nuc: float, *,
                        alpha: float, max_states: int | None = None) -> float:
    """Single-interaction term via the analytic charge derivative.

    Within the finite basis, Z d/dZ of the spectral propagator at Z = 0 is
    exactly the explicit double sum with one potential insertion,

        sum_{m,n} elem(m) V1_{mn} elem(n) * K(E_m, E_n; k),

    where V1 is the unit-charge potential matrix in the free eigenbasis and
    K is the divided difference of the single-pole weight
    w(E) = 1/(E_a - E - sgn(E) k).  For two states on the same energy
    branch this collapses to the cancellation-free product
    K = w(E_m) w(E_n), double poles included; across branches the energy
    gap keeps the explicit divided difference well conditioned.  Unlike a
    finite difference in Z, this route has no step-size error, which the
    dense finite-basis pseudo-continuum otherwise turns into step-size
    jitter at the 1e-5 level.
    """
    from .angular import (kappa_to_channel, multipole_range,
                          spatial_coefficients, temporal_coefficients)
    from .photon_pw import _state_selection, multipole_elements

    sp = free_spectrum
    chan_a = ref.channel
    chan_n = kappa_to_channel(sp.kappa)
    e_a = ref.energy
    keep = _state_selection(sp, max_states)
    energies = sp.energies[keep]
    nstates = energies.size

    v_eig = unit_charge_potential(sp, alpha=alpha)[np.ix_(keep, keep)]
    sgn = np.where(energies >= 0.0, 1.0, -1.0)
    same = sgn[:, None] == sgn[None, :]
    de = energies[:, None] - energies[None, :]

    norm = 1.0 / (chan_a.j2 + 1.0)
    elements = []
    for J in multipole_range(chan_a, chan_n):
        t_pp, t_x, t_qq = temporal_coefficients(J, chan_a.kappa, chan_n.kappa)
        s_pq, s_x, s_qp = spatial_coefficients(J, chan_a.kappa, chan_n.kappa)
        if t_pp == t_x == t_qq == s_pq == s_x == s_qp == 0.0:
            continue
        elements.append(((t_pp, t_x, t_qq, s_pq, s_x, s_qp),
                         multipole_elements(ref, sp, J, grid)))

    zeros = np.zeros(nstates)
    integrand = np.empty(grid.size)
    for ik, k in enumerate(grid.nodes):
        w = 1.0 / (e_a - energies - sgn * k)
        kernel = np.where(same, w[:, None] * w[None, :],
                          (w[:, None] - w[None, :]) / np.where(same, 1.0, de))
        acc = 0.0
        for (t_pp, t_x, t_qq, s_pq, s_x, s_qp), elem in elements:
            pp = elem.r_pp[ik][keep] if elem.r_pp is not None else zeros
            qq = elem.r_qq[ik][keep] if elem.r_qq is not None else zeros
            pq = elem.r_pq[ik][keep] if elem.r_pq is not None else zeros
            qp = elem.r_qp[ik][keep] if elem.r_qp is not None else zeros
            tm = (t_pp * np.outer(pp, pp)
                  + t_x * (np.outer(pp, qq) + np.outer(qq, pp))
                  + t_qq * np.outer(qq, qq))
            sm = (s_pq * np.outer(pq, pq)
                  - s_x * (np.outer(pq, qp) + np.outer(qp, pq))
                  + s_qp * np.outer(qp, qp))
            acc += norm * float(np.sum((tm - sm) * v_eig * kernel))
        integrand[ik] = k * acc
    return -4.0 * alpha * z_nuc * grid.integrate(integrand)


def one_potential_double_sum(ref: ReferenceState, free_spectrum: RadialSpectrum,
                             k: float, z_nuc: float, *, alpha: float) -> float:
    """Explicit double-sum k-integrand at a single photon momentum.

    Returns the same quantity the derivative routes integrate over k,
    including the -4 alpha k prefactor and the physical charge; used to
    cross-check the finite-difference route point by point.
    """
    probe = QuadratureGrid(panels=((0.0, max(1.0, 2.0 * k), 1),), tail_nodes=0,
                           nodes=np.array([float(k)]), weights=np.array([1.0]))
    return one_potential_exact(ref, free_spectrum, probe, z_nuc, alpha=alpha)
