"""Independent numerical oracles used by the test suite.

Everything here deliberately avoids the production code paths: the
Clebsch-Gordan oracle runs Racah's sum in floating point with log-gamma
factorials, angular weights come from explicit spherical-harmonic
quadrature, and radial integrals from scipy's adaptive quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import sph_harm_y, spherical_jn

from qedse.angular import kappa_to_channel

__all__ = [
    "racah_cg",
    "quad_radial",
    "bessel_moment_quad",
    "AngularQuadrature",
]


def racah_cg(l: float, ml: float, s: float, ms: float, j: float, mj: float) -> float:
    """Racah's closed-form sum with log-gamma factorials (floats only)."""
    if abs(mj - ml - ms) > 1e-12:
        return 0.0

    def lf(x: float) -> float:
        return math.lgamma(x + 1.0)

    pre = 0.5 * (math.log(2.0 * j + 1.0)
                 + lf(j + l - s) + lf(j - l + s) + lf(l + s - j)
                 - lf(l + s + j + 1.0)
                 + lf(l + ml) + lf(l - ml) + lf(s + ms) + lf(s - ms)
                 + lf(j + mj) + lf(j - mj))
    t_min = int(round(max(0.0, l - j + ms, s - j - ml)))
    t_max = int(round(min(l + s - j, l - ml, s + ms)))
    total = 0.0
    for t in range(t_min, t_max + 1):
        ln_den = (lf(t) + lf(l + s - j - t) + lf(l - ml - t) + lf(s + ms - t)
                  + lf(j - s + ml + t) + lf(j - l - ms + t))
        total += (-1.0) ** t * math.exp(pre - ln_den)
    return total


def quad_radial(f, upper: float = 60.0, **kw) -> float:
    val, err = quad(f, 0.0, upper, limit=400, **kw)
    return val


def bessel_moment_quad(n: float, L: int, a: float, k: float) -> float:
    scale = 1.0 / math.sqrt(a)
    return quad_radial(lambda r: r ** n * np.exp(-a * r * r)
                       * spherical_jn(L, k * r), upper=40.0 * scale)


class AngularQuadrature:
    """Spinor-spherical-harmonic contractions on a theta x phi product grid.

    Gauss-Legendre in cos(theta) and a uniform trapezoid in phi integrate
    band-limited spherical polynomials exactly, so the only approximation
    for these finite-l integrands is roundoff.
    """

    def __init__(self, n_theta: int = 80, n_phi: int = 160):
        x, wx = np.polynomial.legendre.leggauss(n_theta)
        self.theta = np.arccos(x)
        self.phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
        self.TH, self.PH = np.meshgrid(self.theta, self.phi, indexing="ij")
        self.W = (wx[:, None] * (2.0 * np.pi / n_phi)) * np.ones_like(self.TH)
        self._sigma = {
            1: np.array([[0.0, -math.sqrt(2.0)], [0.0, 0.0]], complex),
            0: np.array([[1.0, 0.0], [0.0, -1.0]], complex),
            -1: np.array([[0.0, 0.0], [math.sqrt(2.0), 0.0]], complex),
        }

    def ylm(self, l: int, m: int) -> np.ndarray:
        if abs(m) > l:
            return np.zeros_like(self.TH, dtype=complex)
        return sph_harm_y(l, m, self.TH, self.PH)

    def chi(self, kappa: int, mj2: int) -> np.ndarray:
        ch = kappa_to_channel(kappa)
        out = np.zeros((2,) + self.TH.shape, dtype=complex)
        for ms2, comp in ((1, 0), (-1, 1)):
            ml2 = mj2 - ms2
            if abs(ml2) > 2 * ch.ell:
                continue
            cg = racah_cg(ch.ell, ml2 / 2.0, 0.5, ms2 / 2.0,
                          ch.j2 / 2.0, mj2 / 2.0)
            out[comp] = cg * self.ylm(ch.ell, ml2 // 2)
        return out

    def dot(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(self.W * (np.conj(a[0]) * b[0]
                                        + np.conj(a[1]) * b[1])))

    def temporal(self, J: int, ka: int, kn: int) -> tuple[float, float, float]:
        ja2, jn2 = 2 * abs(ka) - 1, 2 * abs(kn) - 1
        t_pp = t_x = t_qq = 0.0
        for m2a in range(-ja2, ja2 + 1, 2):
            ca_p, ca_q = self.chi(ka, m2a), self.chi(-ka, m2a)
            for m2n in range(-jn2, jn2 + 1, 2):
                cn_p, cn_q = self.chi(kn, m2n), self.chi(-kn, m2n)
                for M in range(-J, J + 1):
                    y = self.ylm(J, M)
                    e1 = self.dot(ca_p, y * cn_p)
                    e2 = self.dot(ca_q, y * cn_q)
                    t_pp += (np.conj(e1) * e1).real
                    t_qq += (np.conj(e2) * e2).real
                    t_x += (np.conj(e1) * e2).real
        return t_pp, t_x, t_qq

    def spatial(self, J: int, ka: int, kn: int) -> tuple[float, float, float]:
        ja2, jn2 = 2 * abs(ka) - 1, 2 * abs(kn) - 1
        s_pq = s_x = s_qp = 0.0
        for m2a in range(-ja2, ja2 + 1, 2):
            ca_p, ca_q = self.chi(ka, m2a), self.chi(-ka, m2a)
            for m2n in range(-jn2, jn2 + 1, 2):
                cn_q, cn_p = self.chi(-kn, m2n), self.chi(kn, m2n)
                for M in range(-J, J + 1):
                    y = self.ylm(J, M)
                    for q in (-1, 0, 1):
                        sg = self._sigma[q]
                        s1 = self.dot(ca_p, y * np.einsum("ab,b...->a...", sg, cn_q))
                        s2 = self.dot(ca_q, y * np.einsum("ab,b...->a...", sg, cn_p))
                        s_pq += (np.conj(s1) * s1).real
                        s_qp += (np.conj(s2) * s2).real
                        s_x += (np.conj(s1) * s2).real
        return s_pq, s_x, s_qp
