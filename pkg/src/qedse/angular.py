"""Angular-momentum bookkeeping for the relativistic partial-wave machinery.

Conventions
-----------
* kappa is the relativistic angular quantum number: kappa = -(j + 1/2) for
  j = l + 1/2 and kappa = +(j + 1/2) for j = l - 1/2.
* Spinor spherical harmonics are built from Clebsch-Gordan coefficients in
  the Condon-Shortley phase convention,

      chi_{kappa, m}(rhat) = sum_ms <l, m - ms; 1/2, ms | j, m>
                             Y_l^{m-ms}(rhat) u_ms .

* All photon-vertex weights exposed here are *summed over every magnetic
  quantum number* (m_j of both states, the multipole projection M and, for
  the spatial vertex, the spherical vector component q).  They are therefore
  symmetric under exchange of the two channels.  Callers that work at fixed
  reference m_j divide by (2 j_a + 1).

Everything in this module is exact angular algebra (big-integer rational
Clebsch-Gordan coefficients contracted with Gaunt integrals); no numerical
quadrature is involved.  Half-integers are handled internally as doubled
integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "KappaChannel",
    "kappa_to_channel",
    "clebsch_gordan",
    "temporal_coefficients",
    "spatial_coefficients",
    "photon_angular_weight",
    "multipole_range",
]


@dataclass(frozen=True)
class KappaChannel:
    """One relativistic angular channel.

    Attributes
    ----------
    kappa : int
        Signed, nonzero relativistic quantum number.
    ell : int
        Orbital angular momentum of the large component, |kappa + 1/2| - 1/2.
    ell_bar : int
        Orbital angular momentum of the small component, |kappa - 1/2| - 1/2.
    j2 : int
        Twice the total angular momentum, 2j = 2|kappa| - 1.
    """

    kappa: int
    ell: int
    ell_bar: int
    j2: int

    @property
    def j(self) -> float:
        return 0.5 * self.j2

    @property
    def power(self) -> int:
        """Leading radial power |kappa + 1/2| + 1/2 = ell + 1 of the basis."""
        return self.ell + 1


def kappa_to_channel(kappa: int) -> KappaChannel:
    """Map kappa to its (ell, ell_bar, j) channel.

    Raises
    ------
    ValueError
        If ``kappa`` is zero or not an integer.
    """
    if kappa != int(kappa) or kappa == 0:
        raise ValueError(f"kappa must be a nonzero integer, got {kappa!r}")
    kappa = int(kappa)
    ell = (abs(2 * kappa + 1) - 1) // 2
    ell_bar = (abs(2 * kappa - 1) - 1) // 2
    j2 = 2 * abs(kappa) - 1
    return KappaChannel(kappa=kappa, ell=ell, ell_bar=ell_bar, j2=j2)


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients (exact rational Racah sum)
# ---------------------------------------------------------------------------

def _twice(x: float, name: str) -> int:
    """Return 2x as an exact integer; reject non-half-integer input."""
    tx = round(2.0 * float(x))
    if abs(2.0 * float(x) - tx) > 1e-9:
        raise ValueError(f"{name} = {x} is not an integer or half-integer")
    return int(tx)


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=None)
def _cg2(j1_2: int, m1_2: int, j2_2: int, m2_2: int, j_2: int, m_2: int) -> float:
    """<j1 m1; j2 m2 | j m> with all arguments doubled.

    Exact big-integer Racah single-sum evaluation; no floating factorials,
    so it stays accurate up to j of several hundred.
    """
    if m_2 != m1_2 + m2_2:
        return 0.0
    if abs(m1_2) > j1_2 or abs(m2_2) > j2_2 or abs(m_2) > j_2:
        return 0.0
    if not (abs(j1_2 - j2_2) <= j_2 <= j1_2 + j2_2):
        return 0.0
    # j1+j2+j must be an integer and all factorial arguments integral.
    if (j1_2 + j2_2 + j_2) % 2 or (j1_2 + m1_2) % 2 or (j2_2 + m2_2) % 2:
        return 0.0

    def f(two_n: int) -> int:
        if two_n % 2:
            raise ValueError("non-integral factorial argument")
        return _factorial(two_n // 2)

    pre = Fraction(
        (j_2 + 1)
        * f(j1_2 + j2_2 - j_2) * f(j1_2 - j2_2 + j_2) * f(-j1_2 + j2_2 + j_2),
        f(j1_2 + j2_2 + j_2 + 2),
    )
    pre *= Fraction(
        f(j1_2 + m1_2) * f(j1_2 - m1_2)
        * f(j2_2 + m2_2) * f(j2_2 - m2_2)
        * f(j_2 + m_2) * f(j_2 - m_2)
    )

    t_min = max(0, (j2_2 - j_2 - m1_2) // 2, (j1_2 - j_2 + m2_2) // 2)
    t_max = min(
        (j1_2 + j2_2 - j_2) // 2,
        (j1_2 - m1_2) // 2,
        (j2_2 + m2_2) // 2,
    )
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        den = (
            _factorial(t)
            * f(j1_2 + j2_2 - j_2 - 2 * t)
            * f(j1_2 - m1_2 - 2 * t)
            * f(j2_2 + m2_2 - 2 * t)
            * f(j_2 - j2_2 + m1_2 + 2 * t)
            * f(j_2 - j1_2 - m2_2 + 2 * t)
        )
        total += Fraction((-1) ** t, den)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pre * total * total))


def clebsch_gordan(l: float, ml: float, s: float, ms: float,
                   j: float, mj: float) -> float:
    """Clebsch-Gordan coefficient <l ml; s ms | j mj>.

    Inputs may be integers or half-integers.  Returns 0 for a violated
    projection rule, raises for non-half-integer input or a violated
    triangle rule.
    """
    l2, ml2 = _twice(l, "l"), _twice(ml, "ml")
    s2, ms2 = _twice(s, "s"), _twice(ms, "ms")
    j2, mj2 = _twice(j, "j"), _twice(mj, "mj")
    if l2 < 0 or s2 < 0 or j2 < 0:
        raise ValueError("angular momenta must be nonnegative")
    if abs(ml2) > l2 or abs(ms2) > s2:
        raise ValueError("projection exceeds its angular momentum")
    if not (abs(l2 - s2) <= j2 <= l2 + s2):
        raise ValueError(f"triangle rule violated for (l={l}, s={s}, j={j})")
    return _cg2(l2, ml2, s2, ms2, j2, mj2)


@lru_cache(maxsize=None)
def _gaunt(l_bra: int, m_bra: int, J: int, M: int, l_ket: int, m_ket: int) -> float:
    """Integral of Y_{l_bra m_bra}^* Y_{JM} Y_{l_ket m_ket} over the sphere."""
    if m_bra != M + m_ket:
        return 0.0
    if not (abs(J - l_ket) <= l_bra <= J + l_ket):
        return 0.0
    if (l_bra + J + l_ket) % 2:
        return 0.0
    pref = math.sqrt((2 * J + 1) * (2 * l_ket + 1)
                     / (4.0 * math.pi * (2 * l_bra + 1)))
    c0 = _cg2(2 * J, 0, 2 * l_ket, 0, 2 * l_bra, 0)
    cm = _cg2(2 * J, 2 * M, 2 * l_ket, 2 * m_ket, 2 * l_bra, 2 * m_bra)
    return pref * c0 * cm


# Pauli matrices in spherical components, (up, down) basis:
# sigma_{+1} = -(sx + i sy)/sqrt2, sigma_0 = sz, sigma_{-1} = (sx - i sy)/sqrt2.
_SQRT2 = math.sqrt(2.0)
_SIGMA_Q = {
    1: ((0.0, -_SQRT2), (0.0, 0.0)),
    0: ((1.0, 0.0), (0.0, -1.0)),
    -1: ((0.0, 0.0), (_SQRT2, 0.0)),
}


def _chi_y_element(kap_bra: int, m2_bra: int, J: int, M: int,
                   kap_ket: int, m2_ket: int) -> float:
    """<chi_{kap_bra, m_bra} | Y_JM | chi_{kap_ket, m_ket}> (real)."""
    if m2_bra != m2_ket + 2 * M:
        return 0.0
    cb = kappa_to_channel(kap_bra)
    ck = kappa_to_channel(kap_ket)
    total = 0.0
    for ms2 in (-1, 1):
        ml2_b = m2_bra - ms2
        ml2_k = m2_ket - ms2
        if abs(ml2_b) > 2 * cb.ell or abs(ml2_k) > 2 * ck.ell:
            continue
        c_b = _cg2(2 * cb.ell, ml2_b, 1, ms2, cb.j2, m2_bra)
        c_k = _cg2(2 * ck.ell, ml2_k, 1, ms2, ck.j2, m2_ket)
        if c_b == 0.0 or c_k == 0.0:
            continue
        g = _gaunt(cb.ell, ml2_b // 2, J, M, ck.ell, ml2_k // 2)
        total += c_b * c_k * g
    return total


def _chi_ysigma_element(kap_bra: int, m2_bra: int, J: int, M: int, q: int,
                        kap_ket: int, m2_ket: int) -> float:
    """<chi_{kap_bra, m_bra} | Y_JM sigma_q | chi_{kap_ket, m_ket}> (real)."""
    if m2_bra != m2_ket + 2 * M + 2 * q:
        return 0.0
    cb = kappa_to_channel(kap_bra)
    ck = kappa_to_channel(kap_ket)
    sig = _SIGMA_Q[q]
    total = 0.0
    for ms2_b in (-1, 1):
        for ms2_k in (-1, 1):
            s = sig[(1 - ms2_b) // 2][(1 - ms2_k) // 2]
            if s == 0.0:
                continue
            ml2_b = m2_bra - ms2_b
            ml2_k = m2_ket - ms2_k
            if abs(ml2_b) > 2 * cb.ell or abs(ml2_k) > 2 * ck.ell:
                continue
            c_b = _cg2(2 * cb.ell, ml2_b, 1, ms2_b, cb.j2, m2_bra)
            c_k = _cg2(2 * ck.ell, ml2_k, 1, ms2_k, ck.j2, m2_ket)
            if c_b == 0.0 or c_k == 0.0:
                continue
            g = _gaunt(cb.ell, ml2_b // 2, J, M, ck.ell, ml2_k // 2)
            total += c_b * c_k * s * g
    return total


# ---------------------------------------------------------------------------
# Photon-vertex weights
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def temporal_coefficients(J: int, kappa_a: int, kappa_n: int) -> tuple[float, float, float]:
    """Quadratic-form coefficients of the temporal (charge-density) vertex.

    Returns ``(t_pp, t_x, t_qq)`` such that, with R_PP and R_QQ the radial
    large-large and small-small multipole integrals, the m-summed squared
    vertex element is

        t_pp * R_PP**2 + 2 * t_x * R_PP * R_QQ + t_qq * R_QQ**2 .

    The sum runs over m_j of both channels and the multipole projection M.
    """
    ja2 = 2 * abs(kappa_a) - 1
    jn2 = 2 * abs(kappa_n) - 1
    t_pp = t_x = t_qq = 0.0
    for m2a in range(-ja2, ja2 + 1, 2):
        for m2n in range(-jn2, jn2 + 1, 2):
            if (m2a - m2n) % 2:
                continue
            M = (m2a - m2n) // 2
            if abs(M) > J:
                continue
            e_pp = _chi_y_element(kappa_a, m2a, J, M, kappa_n, m2n)
            e_qq = _chi_y_element(-kappa_a, m2a, J, M, -kappa_n, m2n)
            t_pp += e_pp * e_pp
            t_qq += e_qq * e_qq
            t_x += e_pp * e_qq
    return t_pp, t_x, t_qq


@lru_cache(maxsize=None)
def spatial_coefficients(J: int, kappa_a: int, kappa_n: int) -> tuple[float, float, float]:
    """Quadratic-form coefficients of the spatial (current) vertex.

    Returns ``(s_pq, s_x, s_qp)`` such that, with R_PQ = <P_a|j_J|Q_n> and
    R_QP = <Q_a|j_J|P_n>, the m- and component-summed squared element is

        s_pq * R_PQ**2 - 2 * s_x * R_PQ * R_QP + s_qp * R_QP**2 .

    The relative minus sign comes from the i factors of the small
    components.
    """
    ja2 = 2 * abs(kappa_a) - 1
    jn2 = 2 * abs(kappa_n) - 1
    s_pq = s_x = s_qp = 0.0
    for m2a in range(-ja2, ja2 + 1, 2):
        for m2n in range(-jn2, jn2 + 1, 2):
            for q in (-1, 0, 1):
                rem = m2a - m2n - 2 * q
                if rem % 2:
                    continue
                M = rem // 2
                if abs(M) > J:
                    continue
                s1 = _chi_ysigma_element(kappa_a, m2a, J, M, q, -kappa_n, m2n)
                s2 = _chi_ysigma_element(-kappa_a, m2a, J, M, q, kappa_n, m2n)
                s_pq += s1 * s1
                s_qp += s2 * s2
                s_x += s1 * s2
    return s_pq, s_x, s_qp


def photon_angular_weight(J: int, chan_a: KappaChannel, chan_n: KappaChannel,
                          vertex: str) -> float:
    """m-summed angular weight of photon multipole J between two channels.

    ``vertex`` selects the Dirac-matrix structure: ``"temporal"`` gives the
    large-large charge-density weight, ``"spatial"`` the large-small current
    weight.  Both are symmetric under exchanging the two channels and vanish
    outside the triangle |j_a - j_n| <= J <= j_a + j_n and the parity rule
    of the vertex.
    """
    if J < 0 or J != int(J):
        raise ValueError(f"multipole order must be a nonnegative integer, got {J}")
    if vertex == "temporal":
        return temporal_coefficients(int(J), chan_a.kappa, chan_n.kappa)[0]
    if vertex == "spatial":
        return spatial_coefficients(int(J), chan_a.kappa, chan_n.kappa)[0]
    raise ValueError(f"unknown vertex type {vertex!r}")


def multipole_range(chan_a: KappaChannel, chan_n: KappaChannel) -> range:
    """Photon multipole orders that can couple this channel pair.

    The temporal vertex is a rank-J spherical tensor, so it obeys the bare
    j-triangle.  The spatial vertex couples through [Y_J x sigma]^L with
    total rank L in {J-1, J, J+1}; the j-triangle constrains L, which lets
    J reach one unit beyond j_a + j_n (and one below |j_a - j_n|).  The
    weight functions vanish identically wherever a particular (J, vertex)
    is actually forbidden.
    """
    lo = max(0, abs(chan_a.j2 - chan_n.j2) // 2 - 1)
    hi = (chan_a.j2 + chan_n.j2) // 2 + 1
    return range(lo, hi + 1)
