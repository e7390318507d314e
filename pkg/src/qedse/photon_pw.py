"""Partial-wave photon-exchange engine.

For one intermediate-state channel kappa_n and one spectral family this
evaluates the self-energy-like term

    dE = -4 alpha sum_n sum_J integral_0^inf dk
         k * [T_J(n, k) - S_J(n, k)] / (E_a - E_n - sgn(E_n) k)

where the Feynman contour integral over the virtual-photon energy has
already been carried out analytically (it produces the energy denominator
with the sign of E_n selecting which pole contributes, and the single power
of k), and the angular integrals have been reduced to the multipole
quadratic forms

    T_J = [t_pp R_PP^2 + 2 t_x R_PP R_QQ + t_qq R_QQ^2] / (2 j_a + 1)
    S_J = [s_pq R_PQ^2 - 2 s_x R_PQ R_QP + s_qp R_QP^2] / (2 j_a + 1)

with radial elements R_XY(n, k) = integral X_a(r) Y_n(r) j_J(k r) dr.  For
a j_a = 1/2 reference exactly two multipoles contribute per kappa_n: the
temporal (charge) vertex at J = l_n and the spatial (current) vertex at
J = l_bar_n.  Every radial element is a finite sum of closed-form Gaussian
Bessel moments contracted with eigenvector coefficients; the only numerical
step is the quadrature over the photon-momentum magnitude.

Summation order is fixed (ascending k node, ascending state index) and the
final reduction is exact (math.fsum), so results are reproducible bitwise
for a given build of the numerical stack regardless of how many worker
threads the caller uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import (
    KappaChannel,
    kappa_to_channel,
    multipole_range,
    spatial_coefficients,
    temporal_coefficients,
)
from .basis import log_norm_constant
from .dirac import RadialSpectrum

__all__ = [
    "QuadratureGrid",
    "MultipoleElementTable",
    "ReferenceState",
    "PoleEncounteredError",
    "build_kgrid",
    "kgrid_level",
    "reference_state",
    "multipole_elements",
    "photon_weight",
    "partial_wave_term",
    "partial_wave_integrand",
]

POLE_TOL = 1e-12
_K_CHUNK = 48


class PoleEncounteredError(ArithmeticError):
    """A photon-momentum denominator vanished; for a ground-state reference
    this indicates a configuration error (complex poles are out of scope)."""


# ---------------------------------------------------------------------------
# Photon-momentum quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre grid on (0, inf), natural units mc^2/(hbar c).

    ``panels`` are (lo, hi, n) finite Gauss-Legendre panels; the semi-
    infinite tail beyond the last panel edge is mapped rationally,
    k = k0 + s t/(1-t), and carries ``tail_nodes`` points.
    """

    panels: tuple[tuple[float, float, int], ...]
    tail_nodes: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, f) -> float:
        """Apply the rule to a callable or to precomputed node values."""
        vals = f(self.nodes) if callable(f) else np.asarray(f, dtype=float)
        return math.fsum((self.weights * vals).tolist())


def build_kgrid(panels=((0.0, 1.0, 64), (1.0, 10.0, 64), (10.0, 100.0, 48)),
                tail_nodes: int = 48, tail_scale: float | None = None) -> QuadratureGrid:
    """Assemble the composite grid; rejects empty or disordered panels."""
    if not panels:
        raise ValueError("at least one quadrature panel is required")
    nodes: list[np.ndarray] = []
    weights: list[np.ndarray] = []
    prev_hi = 0.0
    for lo, hi, n in panels:
        if n < 1 or hi <= lo or lo < prev_hi:
            raise ValueError(f"bad panel ({lo}, {hi}, {n})")
        prev_hi = hi
        x, w = np.polynomial.legendre.leggauss(int(n))
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    k0 = panels[-1][1]
    if tail_nodes:
        s = tail_scale if tail_scale is not None else k0
        t, w = np.polynomial.legendre.leggauss(int(tail_nodes))
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        nodes.append(k0 + s * t / (1.0 - t))
        weights.append(w * s / (1.0 - t) ** 2)
    kn = np.concatenate(nodes)
    kw = np.concatenate(weights)
    order = np.argsort(kn)
    grid = QuadratureGrid(panels=tuple((float(a), float(b), int(n)) for a, b, n in panels),
                          tail_nodes=int(tail_nodes),
                          nodes=np.ascontiguousarray(kn[order]),
                          weights=np.ascontiguousarray(kw[order]))
    if grid.size < 32:
        raise ValueError("composite grid needs at least 32 nodes")
    return grid


def kgrid_level(level: int) -> QuadratureGrid:
    """Self-convergence ladder of grids; level 0 is the default rule.

    Each level doubles the panel densities and pushes the rationally mapped
    tail outward through additional logarithmic decades, so successive
    levels can be compared to verify quadrature convergence.
    """
    if level < 0:
        raise ValueError("grid level must be nonnegative")
    f = 2 ** level
    panels = [(0.0, 1.0, 64 * f), (1.0, 10.0, 64 * f), (10.0, 100.0, 48 * f)]
    edge = 100.0
    for _ in range(level):
        panels.append((edge, edge * 10.0, 32 * f))
        edge *= 10.0
    return build_kgrid(tuple(panels), tail_nodes=48 * f, tail_scale=edge)


# ---------------------------------------------------------------------------
# Reference state and radial multipole elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceState:
    """Contracted radial profiles of the state whose self-energy is sought.

    ``p_terms``/``q_terms`` hold (power, amplitude-vector) pairs such that
    P_a(r) = sum_i amp_i exp(lognorm_i) r^power exp(-zeta_i r^2) and
    likewise for Q_a; normalization factors live in ``lognorms`` so the
    amplitude vectors stay O(1)-scaled.
    """

    channel: KappaChannel
    energy: float
    exponents: np.ndarray
    lognorms: np.ndarray
    p_terms: tuple[tuple[float, np.ndarray], ...]
    q_terms: tuple[tuple[float, np.ndarray], ...]


def _channel_terms(channel: KappaChannel, exponents: np.ndarray):
    """(power, coef) structure of the large and RKB small basis functions,
    with the shared large-component norm split off."""
    pw = float(channel.power)
    ones = np.ones_like(exponents)
    p_terms = ((pw, ones),)
    low = 0.5 * (pw + channel.kappa)
    q_terms = []
    if low != 0.0:
        q_terms.append((pw - 1.0, low * ones))
    q_terms.append((pw + 1.0, -exponents))
    return p_terms, tuple(q_terms)


def _lognorms(channel: KappaChannel, exponents: np.ndarray) -> np.ndarray:
    pw = float(channel.power)
    return np.array([log_norm_constant(pw, z) for z in exponents])


def reference_state(spectrum: RadialSpectrum, index: int | None = None) -> ReferenceState:
    """Freeze one eigenstate (default: lowest positive energy) as reference."""
    if index is None:
        index = spectrum.bound_index()
    energy, cp, cq = spectrum.state(index)
    channel = kappa_to_channel(spectrum.kappa)
    exps = spectrum.spec.exponents()
    p_base, q_base = _channel_terms(channel, exps)
    p_terms = tuple((pw, coef * cp) for pw, coef in p_base)
    q_terms = tuple((pw, coef * cq) for pw, coef in q_base)
    return ReferenceState(channel=channel, energy=energy, exponents=exps,
                          lognorms=_lognorms(channel, exps),
                          p_terms=p_terms, q_terms=q_terms)


@dataclass(frozen=True)
class MultipoleElementTable:
    """Radial multipole elements for one (family spectrum, J).

    Arrays are (n_k, 2 n_b); entries are None when the corresponding vertex
    is forbidden by parity for this multipole.
    """

    J: int
    kappa_n: int
    r_pp: np.ndarray | None
    r_qq: np.ndarray | None
    r_pq: np.ndarray | None
    r_qp: np.ndarray | None


def _element_pair(ref: ReferenceState, spectrum: RadialSpectrum, J: int,
                  k: np.ndarray, bra_terms, ket_terms, contraction,
                  ln_norm_mat: np.ndarray, ln_a: np.ndarray,
                  a_mat: np.ndarray) -> np.ndarray:
    """R(n_k, 2 n_b) = <bra | j_J(k r) | ket-basis> @ contraction.

    Every (bra power, ket power) pair contributes a closed-form Bessel
    moment; n - J is even and >= 0 throughout, so the confluent series
    terminates and only exp + short polynomials are evaluated.
    """
    nk = k.size
    beta = J + 1.5
    lnk = np.log(k)
    u = np.zeros((nk, a_mat.shape[1]))
    x = (0.25 * k[:, None, None] ** 2) / a_mat[None, :, :]
    expx = np.exp(-x)
    for pw_b, amp_b in bra_terms:
        for pw_k, amp_k in ket_terms:
            m = pw_b + pw_k
            d2 = m - J - 2.0
            if abs(d2 - round(d2)) > 1e-9 or round(d2) % 2 or d2 < 0:
                raise ValueError(f"unexpected moment structure m={m}, J={J}")
            d = int(round(d2)) // 2
            half = 0.5 * (m + J + 1.0)
            const = (0.5 * math.log(math.pi / 2.0) - (J + 1.5) * math.log(2.0)
                     + math.lgamma(half) - math.lgamma(beta))
            logpref = (const + J * lnk[:, None, None]
                       - half * ln_a[None, :, :] + ln_norm_mat[None, :, :])
            table = np.exp(logpref) * expx
            if d > 0:
                poly = np.zeros_like(x)
                coeffs = [1.0]
                c = 1.0
                for t in range(1, d + 1):
                    c *= -(d - t + 1) / ((beta + t - 1.0) * t)
                    coeffs.append(c)
                for cc in reversed(coeffs):
                    poly = poly * x + cc
                table *= poly
            u += np.einsum("i,kij,j->kj", amp_b, table, amp_k, optimize=True)
    return u @ contraction


def multipole_elements(ref: ReferenceState, spectrum: RadialSpectrum, J: int,
                       grid: QuadratureGrid) -> MultipoleElementTable:
    """Assemble the temporal and spatial radial elements for multipole J.

    Each of the four element arrays is built only when its own angular
    weight is nonzero; at the edge multipoles typically a single element
    survives the selection rules.
    """
    chan_n = kappa_to_channel(spectrum.kappa)
    chan_a = ref.channel
    t_pp, _, t_qq = temporal_coefficients(J, chan_a.kappa, chan_n.kappa)
    s_pq, _, s_qp = spatial_coefficients(J, chan_a.kappa, chan_n.kappa)

    exps_n = spectrum.spec.exponents()
    a_mat = ref.exponents[:, None] + exps_n[None, :]
    ln_a = np.log(a_mat)
    ln_norm = ref.lognorms[:, None] + _lognorms(chan_n, exps_n)[None, :]
    ket_p, ket_q = _channel_terms(chan_n, exps_n)
    nb = spectrum.n_b
    cp, cq = spectrum.coeffs[:nb, :], spectrum.coeffs[nb:, :]

    nk = grid.size
    shape = (nk, spectrum.coeffs.shape[1])
    r_pp = np.zeros(shape) if t_pp != 0.0 else None
    r_qq = np.zeros(shape) if t_qq != 0.0 else None
    r_pq = np.zeros(shape) if s_pq != 0.0 else None
    r_qp = np.zeros(shape) if s_qp != 0.0 else None

    for start in range(0, nk, _K_CHUNK):
        sl = slice(start, min(start + _K_CHUNK, nk))
        k = grid.nodes[sl]
        if r_pp is not None:
            r_pp[sl] = _element_pair(ref, spectrum, J, k, ref.p_terms, ket_p,
                                     cp, ln_norm, ln_a, a_mat)
        if r_qq is not None:
            r_qq[sl] = _element_pair(ref, spectrum, J, k, ref.q_terms, ket_q,
                                     cq, ln_norm, ln_a, a_mat)
        if r_pq is not None:
            r_pq[sl] = _element_pair(ref, spectrum, J, k, ref.p_terms, ket_q,
                                     cq, ln_norm, ln_a, a_mat)
        if r_qp is not None:
            r_qp[sl] = _element_pair(ref, spectrum, J, k, ref.q_terms, ket_p,
                                     cp, ln_norm, ln_a, a_mat)

    if not (np.all(np.isfinite(grid.nodes))
            and all(r is None or np.all(np.isfinite(r))
                    for r in (r_pp, r_qq, r_pq, r_qp))):
        raise FloatingPointError("non-finite multipole element encountered")
    return MultipoleElementTable(J=J, kappa_n=spectrum.kappa,
                                 r_pp=r_pp, r_qq=r_qq, r_pq=r_pq, r_qp=r_qp)


def photon_weight(e_a: float, e_n, k):
    """Energy denominator 1/(E_a - E_n - sgn(E_n) hbar c k) after the
    analytic contour integration.  Raises PoleEncounteredError when a
    denominator falls below POLE_TOL, which cannot happen for a
    ground-state reference with k > 0."""
    e_n = np.asarray(e_n, dtype=float)
    k = np.asarray(k, dtype=float)
    den = e_a - e_n - np.where(e_n >= 0.0, 1.0, -1.0) * k
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleEncounteredError(
            "photon-momentum integrand hit a pole; the reference state is "
            "not the lowest level of its potential")
    return 1.0 / den


def _state_selection(spectrum: RadialSpectrum, max_states: int | None) -> np.ndarray:
    """Indices of the intermediate states kept in the spectral sum; the
    default keeps all of them, a truncation keeps the lowest |E| ones
    (used by convergence diagnostics)."""
    if max_states is None or max_states >= spectrum.energies.size:
        return np.arange(spectrum.energies.size)
    return np.sort(np.argsort(np.abs(spectrum.energies))[:max_states])


def _spectrum_integrand(ref: ReferenceState, spectrum: RadialSpectrum,
                        grid: QuadratureGrid,
                        max_states: int | None = None) -> np.ndarray:
    """Integrand I(k) such that dE = -4 alpha * integral I(k) dk."""
    chan_a = ref.channel
    chan_n = kappa_to_channel(spectrum.kappa)
    keep = _state_selection(spectrum, max_states)
    weight = photon_weight(ref.energy, spectrum.energies[None, keep],
                           grid.nodes[:, None])
    norm = 1.0 / (chan_a.j2 + 1.0)
    total = np.zeros(grid.size)
    for J in multipole_range(chan_a, chan_n):
        t_pp, t_x, t_qq = temporal_coefficients(J, chan_a.kappa, chan_n.kappa)
        s_pq, s_x, s_qp = spatial_coefficients(J, chan_a.kappa, chan_n.kappa)
        if t_pp == t_x == t_qq == s_pq == s_x == s_qp == 0.0:
            continue
        elem = multipole_elements(ref, spectrum, J, grid)
        m = np.zeros_like(weight)
        if elem.r_pp is not None:
            m += t_pp * elem.r_pp[:, keep] ** 2
        if elem.r_qq is not None:
            m += t_qq * elem.r_qq[:, keep] ** 2
        if elem.r_pp is not None and elem.r_qq is not None:
            m += 2.0 * t_x * elem.r_pp[:, keep] * elem.r_qq[:, keep]
        if elem.r_pq is not None:
            m -= s_pq * elem.r_pq[:, keep] ** 2
        if elem.r_qp is not None:
            m -= s_qp * elem.r_qp[:, keep] ** 2
        if elem.r_pq is not None and elem.r_qp is not None:
            m -= -2.0 * s_x * elem.r_pq[:, keep] * elem.r_qp[:, keep]
        total += norm * np.sum(m * weight, axis=1)
    return grid.nodes * total


def partial_wave_integrand(ref: ReferenceState, spectrum: RadialSpectrum,
                           k_values) -> np.ndarray:
    """Evaluate the k integrand (without the -4 alpha prefactor) at given
    photon momenta; used for small-k finiteness diagnostics."""
    k = np.atleast_1d(np.asarray(k_values, dtype=float))
    probe = QuadratureGrid(panels=((0.0, 1.0, k.size),), tail_nodes=0,
                           nodes=k, weights=np.ones_like(k))
    return _spectrum_integrand(ref, spectrum, probe)


def partial_wave_term(ref: ReferenceState, family, kappa_n: int,
                      grid: QuadratureGrid, *, alpha: float,
                      max_states: int | None = None) -> float:
    """Self-energy-like term for intermediate states of channel kappa_n.

    ``family`` is either a RadialSpectrum for that channel or a spectral
    family object exposing ``spectra[kappa_n]`` (bound/free) or shifted-
    charge pairs (one-potential; combined by the caller in greens).
    Returns the term in natural energy units (mc^2).  ``max_states``
    truncates the intermediate-state sum (diagnostics only).
    """
    spectrum = family
    if not isinstance(family, RadialSpectrum):
        spectrum = family.spectra[kappa_n]
    if spectrum.kappa != kappa_n:
        raise ValueError(f"family spectrum has kappa={spectrum.kappa}, "
                         f"requested {kappa_n}")
    integrand = _spectrum_integrand(ref, spectrum, grid, max_states)
    return -4.0 * alpha * grid.integrate(integrand)
