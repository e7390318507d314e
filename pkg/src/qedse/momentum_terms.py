"""Renormalized momentum-space contributions: free self-energy and vertex.

Both operators are one-loop, Feynman gauge, evaluated with dimensional
regularization and on-shell mass subtraction.  The remaining logarithmic
divergence (proportional to p-slash - m in the self-energy and to gamma^0
in the temporal vertex) is removed jointly: the same regulator constant is
dropped from both, which the Ward identity ties together and which leaves
the sum of the two terms scheme independent.  Natural units m = c = 1.

Self-energy operator (rho = p^2 four-momentum squared):

    Sigma_R(p) = (alpha/4pi) [ a(rho) + b(rho) pslash ]
    a(rho) = 2 + 4 (1-rho) log(1-rho) / rho
    b(rho) = -1 - 1/rho - (1-rho^2) log(1-rho) / rho^2

a + b vanishes on shell (rho -> 1), which is the on-shell mass condition.

Temporal vertex between legs (E, p1) and (E, p2) with angle xi:

    Gamma_R^0 = (alpha/4pi) integral over the Feynman simplex of
        -2 [log Delta + 2] gamma^0
        + [ 2 Aslash_2 gamma^0 Aslash_1 - 8 w E + 2 gamma^0 ] / Delta

with A_1 = (1-x) p_1 - y p_2, A_2 = (1-y) p_2 - x p_1, w = 1 - x - y and
Delta = (x p_1 + y p_2)^2 - x p_1^2 - y p_2^2 + (x+y).  For bound-state
kinematics (E < 1, arbitrary spacelike legs) Delta > 0 on the open simplex,
and after the substitution x = s u, y = s (1-u) the s integral is analytic;
the single remaining u integral is done by fixed Gauss-Legendre quadrature.
The result is organized in seven scalar coefficients multiplying the Dirac
structures gamma^0, 1, gamma.p1hat, gamma.p2hat, gamma^0 (gamma.p1hat)
(gamma.p2hat), gamma^0 (gamma.p2hat)(gamma.p1hat) and the diagonal
gamma^0 (gamma.phat)^2 pieces.

``scheme_shift`` adds c*(pslash - 1) to Sigma_R while subtracting
c*gamma^0 from Gamma_R^0 (in units of alpha/4pi): a pure renormalization
reshuffle that must cancel between the zero- and one-potential energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre

from .angular import KappaChannel, kappa_to_channel
from .basis import bessel_moment_integral, log_norm_constant
from .dirac import RadialSpectrum

__all__ = [
    "LoopFormFactors",
    "MomentumWave",
    "KinematicDomainError",
    "coulomb_momentum",
    "sigma_r",
    "gamma_r0",
    "momentum_wave",
    "momentum_grid",
    "zero_potential_term",
    "one_potential_term",
]

_UGAUSS_N = 64


class KinematicDomainError(ValueError):
    """Kinematics outside the validated bound-state domain (E >= mc^2)."""


# ---------------------------------------------------------------------------
# External field in momentum space
# ---------------------------------------------------------------------------

def coulomb_momentum(q, Z: float, alpha: float):
    """Point-Coulomb potential in momentum space, -Z alpha / (2 pi^2 q^2).

    The 1/q^2 singularity is integrable in three dimensions; callers must
    never sample q = 0 (rejected here).
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0.0):
        raise ValueError("momentum transfer must be positive")
    out = -Z * alpha / (2.0 * math.pi ** 2 * q * q)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Renormalized self-energy operator
# ---------------------------------------------------------------------------

def _log1m_over(rho: np.ndarray) -> np.ndarray:
    """log(1-rho)/rho, stable through rho = 0."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(rho)
    small = np.abs(rho) < 1e-4
    rs = rho[small]
    out[small] = -(1.0 + rs * (0.5 + rs * (1.0 / 3.0 + rs * 0.25)))
    rb = rho[~small]
    out[~small] = np.log1p(-rb) / rb
    return out


def _sigma_ab(rho) -> tuple[np.ndarray, np.ndarray]:
    rho = np.asarray(rho, dtype=float)
    a = np.empty_like(rho)
    b = np.empty_like(rho)
    small = np.abs(rho) < 1e-4
    rs = rho[small]
    # a = -2 + 4 sum_{n>=1} rho^n / (n (n+1)),  b = -1/2 - 2 sum rho^n / (n (n+2))
    a[small] = -2.0 + 4.0 * rs * (0.5 + rs * (1.0 / 6.0 + rs / 12.0))
    b[small] = -0.5 - 2.0 * rs * (1.0 / 3.0 + rs * (0.125 + rs / 15.0))
    rb = rho[~small]
    lg = np.log1p(-rb)
    a[~small] = 2.0 + 4.0 * (1.0 - rb) * lg / rb
    b[~small] = -1.0 - 1.0 / rb - (1.0 - rb * rb) * lg / (rb * rb)
    return a, b


@dataclass(frozen=True)
class LoopFormFactors:
    """Scalar form factors of a renormalized loop operator.

    For the self-energy: ``values = (a, b)`` multiplying (1, pslash).
    For the vertex: the seven coefficients described in the module
    docstring, in the order (c_g0, c_unit, c_v1, c_v2, c_12, c_21, c_dd).
    All carry the common prefactor alpha/(4 pi), which is *not* included.
    """

    kind: str
    values: tuple[float, ...]


def _check_bound_energy(e: float) -> None:
    if not e < 1.0:
        raise KinematicDomainError(
            f"reference energy {e} >= mc^2 lies outside the bound-state domain")


def sigma_r(E: float, p: float, *, scheme_shift: float = 0.0) -> LoopFormFactors:
    """Renormalized free self-energy form factors at (E, |p|)."""
    _check_bound_energy(E)
    rho = E * E - p * p
    a, b = _sigma_ab(np.asarray([rho]))
    return LoopFormFactors(kind="self_energy",
                           values=(float(a[0]) - scheme_shift,
                                   float(b[0]) + scheme_shift))


# ---------------------------------------------------------------------------
# Renormalized temporal vertex
# ---------------------------------------------------------------------------

def _phi123(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi_k(r) = integral_0^1 t^(k-1)/(1 + r t) dt for k = 1, 2, 3.

    Valid for r > -1; series branch keeps the recurrences stable near 0.
    """
    r = np.asarray(r, dtype=float)
    phi1 = np.empty_like(r)
    phi2 = np.empty_like(r)
    phi3 = np.empty_like(r)
    small = np.abs(r) < 1e-3
    rs = r[small]
    # phi_k = sum_s (-r)^s / (k + s)
    phi1[small] = 1.0 - rs * (1.0 / 2.0 - rs * (1.0 / 3.0 - rs * (0.25 - rs / 5.0)))
    phi2[small] = 0.5 - rs * (1.0 / 3.0 - rs * (0.25 - rs * (0.2 - rs / 6.0)))
    phi3[small] = (1.0 / 3.0) - rs * (0.25 - rs * (0.2 - rs * (1.0 / 6.0 - rs / 7.0)))
    rb = r[~small]
    p1 = np.log1p(rb) / rb
    p2 = (1.0 - p1) / rb
    p3 = (0.5 - p2) / rb
    phi1[~small], phi2[~small], phi3[~small] = p1, p2, p3
    return phi1, phi2, phi3


def _vertex_coefficients(E: float, p1, p2, xi, *, scheme_shift: float = 0.0):
    """Seven vertex coefficients, vectorized over broadcast (p1, p2, xi).

    Returns arrays shaped like the broadcast inputs.
    """
    p1, p2, xi = np.broadcast_arrays(np.asarray(p1, float),
                                     np.asarray(p2, float),
                                     np.asarray(xi, float))
    rho1 = E * E - p1 * p1
    rho2 = E * E - p2 * p2
    d12 = E * E - p1 * p2 * xi

    un, uw = np.polynomial.legendre.leggauss(_UGAUSS_N)
    un = 0.5 * (un + 1.0)
    uw = 0.5 * uw
    sh = p1.shape + (1,)
    u = un.reshape((1,) * p1.ndim + (-1,))
    w_u = uw.reshape((1,) * p1.ndim + (-1,))

    g = (u * u * rho1.reshape(sh) + (1.0 - u) ** 2 * rho2.reshape(sh)
         + 2.0 * u * (1.0 - u) * d12.reshape(sh))
    c = u * rho1.reshape(sh) + (1.0 - u) * rho2.reshape(sh) - 1.0
    minus_c = -c
    if np.any(minus_c <= 0.0):
        raise KinematicDomainError("vertex kinematics reached the threshold")
    r = g / minus_c
    phi1, phi2, phi3 = _phi123(r)
    j0 = phi1 / minus_c
    j1 = phi2 / minus_c
    j2 = phi3 / minus_c
    sl = 0.5 * np.log(minus_c) + 0.5 * np.log1p(r) - 0.5 * r * phi3

    def usum(arr):
        return np.sum(w_u * arr, axis=-1)

    e2 = E * E
    c_g0 = (-1.5 - 2.0 * usum(sl) + 2.0 * e2 * usum(j0 - 2.0 * j1 + j2)
            + 2.0 * usum(j0)) - scheme_shift
    c_unit = -8.0 * E * usum(j0 - j1)
    c_v1 = -2.0 * E * p1 * usum(j0 - (1.0 + 2.0 * u) * j1 + 2.0 * u * j2)
    c_v2 = -2.0 * E * p2 * usum(j0 - (3.0 - 2.0 * u) * j1 + 2.0 * (1.0 - u) * j2)
    c_12 = -2.0 * p1 * p2 * usum(u * (1.0 - u) * j2)
    c_21 = -2.0 * p1 * p2 * usum(j0 - j1 + u * (1.0 - u) * j2)
    c_dd = 2.0 * (p1 * p1 * usum(u * j1 - u * u * j2)
                  + p2 * p2 * usum((1.0 - u) * j1 - (1.0 - u) ** 2 * j2))
    return c_g0, c_unit, c_v1, c_v2, c_12, c_21, c_dd


def gamma_r0(E: float, p1: float, p2: float, cos_theta12: float, *,
             scheme_shift: float = 0.0) -> LoopFormFactors:
    """Renormalized temporal-vertex form factors at (E, |p1|, |p2|, angle).

    Symmetric under p1 <-> p2.  Raises KinematicDomainError outside the
    bound-state domain.
    """
    _check_bound_energy(E)
    if not -1.0 <= cos_theta12 <= 1.0:
        raise ValueError("cos_theta12 must lie in [-1, 1]")
    vals = _vertex_coefficients(E, p1, p2, cos_theta12,
                                scheme_shift=scheme_shift)
    return LoopFormFactors(kind="vertex",
                           values=tuple(float(np.asarray(v)) for v in vals))


# ---------------------------------------------------------------------------
# Momentum-space reference wave
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentumWave:
    """Analytic momentum-space radial functions of one bound state.

    P_t(p) carries the large component (a Gaussian expansion with exponents
    1/(4 zeta_i)); Q_t(p) carries the small component including its
    -sgn(kappa) transform phase.  ``channel`` fixes the Legendre orders
    entering angular contractions and ``energy`` the loop kinematics.
    """

    channel: KappaChannel
    energy: float
    Z: float
    alpha_inv: float
    _pt_exponents: np.ndarray
    _pt_amps: np.ndarray
    _pt_power: float
    _q_exponents: np.ndarray
    _q_terms: tuple[tuple[float, np.ndarray], ...]

    def p_tilde(self, p) -> np.ndarray:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        vals = np.exp(-np.outer(p * p, self._pt_exponents))
        return (p ** self._pt_power) * (vals @ self._pt_amps)

    def q_tilde(self, p) -> np.ndarray:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        lbar = self.channel.ell_bar
        sign = -1.0 if self.channel.kappa > 0 else 1.0
        total = np.zeros_like(p)
        for power, amps in self._q_terms:
            t = bessel_moment_integral(power + 1.0, lbar,
                                       self._q_exponents[None, :], p[:, None])
            total += t @ amps
        return sign * math.sqrt(2.0 / math.pi) * p * total

    def density_norm(self, grid) -> float:
        """integral (P_t^2 + Q_t^2) dp on the given grid; should be 1."""
        nodes, weights = grid
        pt = self.p_tilde(nodes)
        qt = self.q_tilde(nodes)
        return float(np.sum(weights * (pt * pt + qt * qt)))


def momentum_wave(spectrum: RadialSpectrum, index: int | None = None) -> MomentumWave:
    """Analytic Bessel transform of one eigenstate of a radial spectrum."""
    if index is None:
        index = spectrum.bound_index()
    energy, cp, cq = spectrum.state(index)
    channel = kappa_to_channel(spectrum.kappa)
    exps = spectrum.spec.exponents()
    power = float(channel.power)

    # Large component: the transform of each normalized Gaussian is again a
    # normalized Gaussian of the same power with exponent 1/(4 zeta).
    pt_exps = 1.0 / (4.0 * exps)
    pt_amps = cp * np.array([math.exp(log_norm_constant(power, z)) for z in pt_exps])

    # Small component: transform the kinetic-balance polynomials directly.
    norms = np.array([math.exp(log_norm_constant(power, z)) for z in exps])
    low = 0.5 * (power + channel.kappa)
    q_terms = []
    if low != 0.0:
        q_terms.append((power - 1.0, cq * norms * low))
    q_terms.append((power + 1.0, cq * norms * (-exps)))

    return MomentumWave(channel=channel, energy=energy,
                        Z=spectrum.spec.Z, alpha_inv=spectrum.spec.alpha_inv,
                        _pt_exponents=pt_exps, _pt_amps=pt_amps,
                        _pt_power=power, _q_exponents=exps,
                        _q_terms=tuple(q_terms))


# ---------------------------------------------------------------------------
# Quadrature grids and the two energy integrals
# ---------------------------------------------------------------------------

def momentum_grid(edges=(0.0, 1e-2, 0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6),
                  nodes_per_panel: int = 40,
                  tail_nodes: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Composite log-structured Gauss-Legendre grid on (0, inf)."""
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    if tail_nodes:
        t, w = np.polynomial.legendre.leggauss(tail_nodes)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        s = edges[-1]
        xs.append(s + s * t / (1.0 - t))
        ws.append(w * s / (1.0 - t) ** 2)
    return np.concatenate(xs), np.concatenate(ws)


def zero_potential_term(wave: MomentumWave, grid=None, *,
                        scheme_shift: float = 0.0) -> float:
    """Expectation value of the renormalized free self-energy operator.

    One radial quadrature over p of the spin-reduced contraction

        a(rho) (P^2 - Q^2) + b(rho) (E (P^2 + Q^2) + 2 p P Q),

    returned in F units (dimensionless, independent of m_j).  The common
    alpha/(4 pi) of the operator and the alpha of the F-unit definition
    cancel, leaving the quadrature sum over 4 (Z alpha)^4.
    """
    if grid is None:
        grid = momentum_grid()
    p, w = grid
    pt = wave.p_tilde(p)
    qt = wave.q_tilde(p)
    rho = wave.energy ** 2 - p * p
    a, b = _sigma_ab(rho)
    a = a - scheme_shift
    b = b + scheme_shift
    dens = (a * (pt * pt - qt * qt)
            + b * (wave.energy * (pt * pt + qt * qt) + 2.0 * p * pt * qt))
    za = wave.Z / wave.alpha_inv
    return float(np.sum(w * dens)) / (4.0 * za ** 4)


def _transfer_log_grid(n_q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_q)
    return 0.5 * (x + 1.0), 0.5 * w


_DIAG_EDGES = (0.3, 1e-2, 1e-4, 1e-6, 1e-8)


def _p2_grid_for(p1: float, edges, n_far: int, n_near: int):
    """Composite p2 grid resolving the integrable log kink at p2 = p1.

    Far from the diagonal the global panel structure is used; inside the
    band |p2/p1 - 1| < 0.3 geometrically shrinking panels approach the
    diagonal from both sides down to a relative gap of 1e-8, which is
    dropped (its contribution is O(1e-7) relative).
    """
    p_max = edges[-1]
    segments: list[tuple[float, float, int]] = []
    band_lo, band_hi = p1 * (1.0 - _DIAG_EDGES[0]), p1 * (1.0 + _DIAG_EDGES[0])
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= band_lo or a >= band_hi:
            segments.append((a, b, n_far))
        else:
            if a < band_lo:
                segments.append((a, band_lo, n_far))
            if b > band_hi:
                segments.append((band_hi, b, n_far))
    for lo_rel, hi_rel in zip(_DIAG_EDGES[:-1], _DIAG_EDGES[1:]):
        below = (p1 * (1.0 - lo_rel), p1 * (1.0 - hi_rel))
        above = (p1 * (1.0 + hi_rel), p1 * (1.0 + lo_rel))
        for a, b in (below, above):
            if b > a and a < p_max:
                segments.append((a, min(b, p_max), n_near))
    xs, ws = [], []
    for a, b, n in segments:
        x, w = np.polynomial.legendre.leggauss(n)
        xs.append(0.5 * (b - a) * x + 0.5 * (b + a))
        ws.append(0.5 * (b - a) * w)
    nodes = np.concatenate(xs)
    weights = np.concatenate(ws)
    order = np.argsort(nodes)
    return nodes[order], weights[order]


def one_potential_term(wave: MomentumWave, Z: float, *,
                       p_edges=(0.0, 0.01, 0.05, 0.25, 1.0, 4.0, 16.0, 64.0,
                                300.0, 2e3, 2e4, 2e5, 2e6),
                       p_nodes: int = 20, n_q: int = 48,
                       n_far: int = 12, n_near: int = 10,
                       scheme_shift: float = 0.0) -> float:
    """Vertex term with one Coulomb interaction, in F units.

    The angular integral over cos(theta12) is recast as an integral over
    log q (q the momentum transfer), which absorbs the 1/q^2 of the
    potential:

        dE = -(alpha Z alpha / 4 pi^2) \\int dp1 dp2 \\int dlog(q) K

    where K contracts the seven vertex coefficients with the radial
    densities and Legendre factors.  The log-q window's lower endpoint
    ln|p1 - p2| leaves an integrable logarithmic kink along the diagonal
    of the (p1, p2) plane, which the per-p1 composite grid of
    :func:`_p2_grid_for` resolves with geometric panels.
    """
    e = wave.energy
    _check_bound_energy(e)
    p1n, p1w = momentum_grid(p_edges, nodes_per_panel=p_nodes, tail_nodes=0)
    tq, wq = _transfer_log_grid(n_q)

    ell = wave.channel.ell
    ell_bar = wave.channel.ell_bar
    pt1_all = wave.p_tilde(p1n)
    qt1_all = wave.q_tilde(p1n)

    total = 0.0
    for i1 in range(p1n.size):
        p1 = float(p1n[i1])
        p2, w2 = _p2_grid_for(p1, p_edges, n_far, n_near)
        pt2 = wave.p_tilde(p2)
        qt2 = wave.q_tilde(p2)
        lo = np.log(np.abs(p1 - p2))
        width = np.log(p1 + p2) - lo
        # (n_p2, n_q) arrays over the transfer variable u = (lnq - lo)/width
        q = np.exp(lo[:, None] + width[:, None] * tq[None, :])
        xi = (p1 * p1 + p2[:, None] ** 2 - q * q) / (2.0 * p1 * p2[:, None])
        xi = np.clip(xi, -1.0, 1.0)
        cg0, cu, cv1, cv2, c12, c21, cdd = _vertex_coefficients(
            e, np.full_like(xi, p1), np.broadcast_to(p2[:, None], xi.shape),
            xi, scheme_shift=scheme_shift)
        wp = eval_legendre(ell, xi)
        wqq = eval_legendre(ell_bar, xi)
        pp = pt1_all[i1] * pt2[:, None]
        qq = qt1_all[i1] * qt2[:, None]
        pq = pt1_all[i1] * qt2[:, None]
        qp = qt1_all[i1] * pt2[:, None]
        kern = (cg0 * (pp * wp + qq * wqq)
                + cu * (pp * wp - qq * wqq)
                - cv1 * (pq * wqq + qp * wp)
                - cv2 * (pq * wp + qp * wqq)
                - c12 * (pp * wqq + qq * wp)
                - c21 * (pp * (2.0 * xi * wp - wqq) + qq * (2.0 * xi * wqq - wp))
                - cdd * (pp * wp + qq * wqq))
        inner = (kern @ wq) * width
        total += float(p1w[i1] * np.sum(w2 * inner))

    za_ref = wave.Z / wave.alpha_inv
    za = Z / wave.alpha_inv
    return -total * za / (4.0 * math.pi * za_ref ** 4)
