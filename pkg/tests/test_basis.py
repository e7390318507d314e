import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qedse.basis import (
    BasisSpec,
    PolyGaussian,
    build_basis,
    bessel_moment_integral,
    coulomb_matrix_element,
    gaussian_moment,
    momentum_transform,
    norm_constant,
    overlap,
    rkb_small_component,
)

from oracles import bessel_moment_quad, quad_radial


def mpmath_bessel_moment(n, L, a, k):
    """40-digit confluent-hypergeometric reference; mpmath's 1F1 is an
    independent evaluation path (no transformed series here)."""
    with mpmath.workdps(40):
        alpha = mpmath.mpf(n + L + 1) / 2
        beta = mpmath.mpf(2 * L + 3) / 2
        x = mpmath.mpf(k) ** 2 / (4 * mpmath.mpf(a))
        pref = (mpmath.sqrt(mpmath.pi / 2) * mpmath.mpf(2) ** (-L - 1.5)
                * mpmath.mpf(k) ** L * mpmath.mpf(a) ** (-alpha)
                * mpmath.gamma(alpha) / mpmath.gamma(beta))
        return float(pref * mpmath.hyp1f1(alpha, beta, -x))


def natural_spec(**kw):
    defaults = dict(kappa=-1, zeta1=0.01, beta_ratio=1.5, n_b=3, Z=1.0)
    defaults.update(kw)
    return BasisSpec(**defaults)


class TestBasisSpec:
    def test_even_tempered_ladder(self):
        spec = natural_spec()
        assert np.allclose(spec.exponents(), [0.01, 0.015, 0.0225], rtol=1e-15)

    def test_bohr_conversion(self):
        spec = BasisSpec.from_bohr(kappa=-1, zeta1_bohr=0.01, beta_ratio=1.5,
                                   n_b=2, Z=92.0)
        alpha = 1.0 / spec.alpha_inv
        assert spec.zeta1 == pytest.approx(0.01 * alpha * alpha, rel=1e-15)

    @pytest.mark.parametrize("kw", [dict(beta_ratio=1.0), dict(beta_ratio=0.5),
                                    dict(zeta1=0.0), dict(zeta1=-1.0),
                                    dict(n_b=1), dict(kappa=0)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            natural_spec(**kw)


class TestBuildBasis:
    def test_s_channel_power(self):
        for g in build_basis(natural_spec(kappa=-1)):
            assert g.power == 1.0

    def test_p_channel_power(self):
        for g in build_basis(natural_spec(kappa=1)):
            assert g.power == 2.0

    def test_norm_against_quadrature(self):
        # kappa=-1, zeta=1: N = (int r^2 e^{-2 r^2})^{-1/2} ~ 2.5264
        n = norm_constant(1.0, 1.0)
        direct = quad_radial(lambda r: r * r * np.exp(-2.0 * r * r)) ** -0.5
        assert n == pytest.approx(direct, rel=1e-12)
        assert n == pytest.approx((0.25 * math.sqrt(math.pi / 8.0)) ** -0.5,
                                  rel=1e-14)

    def test_unit_norm_members(self):
        for g in build_basis(natural_spec(kappa=2, n_b=4)):
            val = quad_radial(lambda r, g=g: (g.norm * r ** g.power
                                              * np.exp(-g.exponent * r * r)) ** 2,
                              upper=40.0 / math.sqrt(g.exponent))
            assert val == pytest.approx(1.0, abs=1e-13)

    def test_large_ladder_positive_definite(self):
        # 100-function even-tempered overlap stays Cholesky-factorizable
        import scipy.linalg
        spec = BasisSpec.from_bohr(kappa=-1, zeta1_bohr=0.01, beta_ratio=1.5,
                                   n_b=100, Z=92.0)
        basis = build_basis(spec)
        s = np.array([[overlap(gi, gj) for gj in basis] for gi in basis])
        scipy.linalg.cholesky(s)  # raises if not positive definite


class TestKineticBalance:
    def test_s_channel_single_term(self):
        g = build_basis(natural_spec(kappa=-1, zeta1=1.0, n_b=2))[0]
        q = rkb_small_component(g, -1)
        assert len(q.terms) == 1
        coef, power = q.terms[0]
        assert power == 2.0
        assert coef == pytest.approx(-g.norm * g.exponent, rel=1e-15)

    def test_p_channel_two_terms(self):
        g = build_basis(natural_spec(kappa=1, zeta1=1.0, n_b=2))[0]
        q = rkb_small_component(g, 1)
        terms = dict((p, c) for c, p in q.terms)
        assert terms[1.0] == pytest.approx(1.5 * g.norm, rel=1e-15)
        assert terms[3.0] == pytest.approx(-g.norm * g.exponent, rel=1e-15)

    def test_small_component_norm_finite(self):
        for kappa in (-3, -1, 1, 3):
            for g in build_basis(natural_spec(kappa=kappa, n_b=3)):
                q = rkb_small_component(g, kappa)
                val = overlap(q, q)
                assert np.isfinite(val) and val > 0.0


class TestMomentumTransform:
    def test_self_dual_exponent(self):
        from qedse.basis import RadialBasisFunction
        g = RadialBasisFunction(exponent=0.5, power=1.0,
                                norm=norm_constant(1.0, 0.5))
        gt = momentum_transform(g)
        assert gt.exponent == pytest.approx(0.5, rel=1e-15)
        assert gt.norm == pytest.approx(g.norm, rel=1e-15)

    @pytest.mark.parametrize("kappa,zeta", [(-1, 0.7), (1, 2.0), (-3, 0.2)])
    def test_against_hankel_oracle(self, kappa, zeta):
        from scipy.special import spherical_jn
        spec = natural_spec(kappa=kappa, zeta1=zeta, n_b=2)
        g = build_basis(spec)[0]
        gt = momentum_transform(g)
        ell = int(g.power - 1)
        for p in (0.3, 1.0, 4.0):
            direct = math.sqrt(2.0 / math.pi) * p * quad_radial(
                lambda r: r * spherical_jn(ell, p * r)
                * g.norm * r ** g.power * np.exp(-g.exponent * r * r),
                upper=40.0 / math.sqrt(g.exponent))
            analytic = gt.norm * p ** gt.power * math.exp(-gt.exponent * p * p)
            assert analytic == pytest.approx(direct, rel=1e-10)

    def test_parseval(self):
        g = build_basis(natural_spec(kappa=-1, zeta1=0.8, n_b=2))[0]
        gt = momentum_transform(g)
        norm_p = quad_radial(lambda p: (gt.norm * p ** gt.power
                                        * np.exp(-gt.exponent * p * p)) ** 2)
        assert norm_p == pytest.approx(1.0, abs=1e-12)

    def test_double_transform_recovers(self):
        g = build_basis(natural_spec(kappa=1, zeta1=1.3, n_b=2))[0]
        gtt = momentum_transform(momentum_transform(g))
        r = np.logspace(-4, math.log10(50.0), 200)
        orig = g.norm * r ** g.power * np.exp(-g.exponent * r * r)
        back = gtt.norm * r ** gtt.power * np.exp(-gtt.exponent * r * r)
        assert np.max(np.abs(orig - back)) < 1e-9


class TestBesselMoment:
    def test_zero_momentum_monopole(self):
        for n, a in ((2.0, 1.5), (5.0, 0.3)):
            assert bessel_moment_integral(n, 0, a, 0.0) == pytest.approx(
                gaussian_moment(n, a), rel=1e-14)

    def test_zero_momentum_higher_orders(self):
        assert bessel_moment_integral(4.0, 2, 1.0, 0.0) == 0.0

    def test_generic_value(self):
        got = bessel_moment_integral(2.0, 1, 1.0, 3.0)
        assert got == pytest.approx(bessel_moment_quad(2.0, 1, 1.0, 3.0), rel=1e-11)

    def test_rejects_divergent(self):
        with pytest.raises(ValueError):
            bessel_moment_integral(0.0, 2, 1.0, 1.0)

    def test_even_family_large_argument(self):
        # x = k^2/(4a) ~ 640: deep exp(-x) regime where the raw alternating
        # series would lose ~550 digits; the quadrature oracle cannot reach
        # it either, so the check is against 40-digit mpmath
        n, L, a, k = 4.0, 0, 0.1, 16.0
        assert k * k / (4.0 * a) > 600.0
        got = bessel_moment_integral(n, L, a, k)
        assert got == pytest.approx(mpmath_bessel_moment(n, L, a, k), rel=1e-11)

    def test_odd_family_against_mpmath(self):
        # n - L odd engages the non-terminating series branch
        for (n, L, a, k) in [(2.0, 0, 0.5, 2.0), (3.0, 2, 1.0, 6.0),
                             (2.0, 1, 0.3, 9.0), (2.0, 0, 0.05, 12.0)]:
            got = bessel_moment_integral(n, L, a, k)
            assert got == pytest.approx(mpmath_bessel_moment(n, L, a, k),
                                        rel=1e-10)

    def test_broadcasting(self):
        a = np.array([0.5, 1.0, 2.0])
        k = np.array([[0.5], [2.0]])
        out = bessel_moment_integral(3.0, 1, a, k)
        assert out.shape == (2, 3)
        for i in range(2):
            for j in range(3):
                assert out[i, j] == pytest.approx(
                    bessel_moment_integral(3.0, 1, float(a[j]), float(k[i, 0])),
                    rel=1e-14)

    @given(st.integers(min_value=0, max_value=3),
           st.integers(min_value=0, max_value=4),
           st.floats(min_value=0.05, max_value=20.0),
           st.floats(min_value=0.01, max_value=12.0))
    @settings(max_examples=60, deadline=None)
    def test_property_sweep_against_quadrature(self, extra, L, a, k):
        n = L + 1.0 + extra
        got = bessel_moment_integral(n, L, a, k)
        # the adaptive-quadrature oracle anchors the targeted cases above;
        # the random sweep needs the high-precision reference because k^L
        # and exp(-x) suppression quickly sink below quadrature noise
        want = mpmath_bessel_moment(n, L, a, k)
        assert got == pytest.approx(want, rel=1e-9,
                                    abs=1e-25 * gaussian_moment(n, a))


class TestCoulombElement:
    def test_positive_for_s_density(self):
        g = build_basis(natural_spec(kappa=-1, zeta1=1.0, n_b=2))[0]
        assert coulomb_matrix_element(g, g) > 0.0

    def test_symmetric(self):
        basis = build_basis(natural_spec(kappa=2, n_b=3))
        assert coulomb_matrix_element(basis[0], basis[2]) == pytest.approx(
            coulomb_matrix_element(basis[2], basis[0]), rel=1e-15)

    def test_spot_against_quadrature(self):
        basis = build_basis(natural_spec(kappa=-2, zeta1=0.4, n_b=3))
        q0 = rkb_small_component(basis[0], -2)
        q2 = rkb_small_component(basis[2], -2)
        want = quad_radial(lambda r: q0(r) * q2(r) / r)
        assert coulomb_matrix_element(q0, q2) == pytest.approx(want, rel=1e-12)

    def test_rejects_divergent_combination(self):
        bad = PolyGaussian(exponent=1.0, terms=((1.0, 0.0),))
        with pytest.raises(ValueError):
            coulomb_matrix_element(bad, bad)

    @given(st.floats(min_value=0.05, max_value=30.0),
           st.floats(min_value=0.05, max_value=30.0),
           st.integers(min_value=-3, max_value=3).filter(lambda k: k != 0))
    @settings(max_examples=40, deadline=None)
    def test_overlap_property_sweep(self, za, zb, kappa):
        from qedse.basis import RadialBasisFunction
        power = abs(kappa + 0.5) + 0.5
        ga = RadialBasisFunction(exponent=za, power=power,
                                 norm=norm_constant(power, za))
        gb = RadialBasisFunction(exponent=zb, power=power,
                                 norm=norm_constant(power, zb))
        want = quad_radial(
            lambda r: (ga.norm * r ** power * np.exp(-za * r * r))
            * (gb.norm * r ** power * np.exp(-zb * r * r)),
            upper=40.0 / math.sqrt(min(za, zb)))
        assert overlap(ga, gb) == pytest.approx(want, rel=1e-10)
