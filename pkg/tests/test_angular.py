import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qedse.angular import (
    clebsch_gordan,
    kappa_to_channel,
    multipole_range,
    photon_angular_weight,
    spatial_coefficients,
    temporal_coefficients,
)

from oracles import AngularQuadrature, racah_cg


class TestKappaChannel:
    def test_s_half(self):
        ch = kappa_to_channel(-1)
        assert (ch.ell, ch.ell_bar, ch.j2) == (0, 1, 1)

    def test_p_half(self):
        ch = kappa_to_channel(1)
        assert (ch.ell, ch.ell_bar, ch.j2) == (1, 0, 1)

    def test_d_three_half(self):
        ch = kappa_to_channel(2)
        assert (ch.ell, ch.ell_bar, ch.j2) == (2, 1, 3)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            kappa_to_channel(0)

    @given(st.integers(min_value=-60, max_value=60).filter(lambda k: k != 0))
    def test_invariants(self, kappa):
        ch = kappa_to_channel(kappa)
        assert ch.ell == abs(kappa + 0.5) - 0.5
        assert ch.ell_bar == abs(kappa - 0.5) - 0.5
        assert ch.j2 == 2 * abs(kappa) - 1
        assert ch.ell_bar == ch.ell - np.sign(kappa)


class TestClebschGordan:
    def test_trivial_coupling(self):
        assert clebsch_gordan(0, 0, 0.5, 0.5, 0.5, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_projection_rule(self):
        assert clebsch_gordan(1, 1, 0.5, 0.5, 1.5, 0.5) == 0.0

    def test_racah_value(self):
        got = clebsch_gordan(1, 0, 0.5, 0.5, 1.5, 0.5)
        assert got == pytest.approx(racah_cg(1, 0, 0.5, 0.5, 1.5, 0.5), abs=1e-13)
        assert got == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-14)

    def test_rejects_triangle_violation(self):
        with pytest.raises(ValueError):
            clebsch_gordan(2, 0, 0.5, 0.5, 4.0, 0.5)

    def test_rejects_non_half_integer(self):
        with pytest.raises(ValueError):
            clebsch_gordan(1, 0.3, 0.5, 0.5, 1.5, 0.8)

    @given(st.integers(min_value=0, max_value=6),
           st.integers(min_value=0, max_value=13))
    @settings(max_examples=40, deadline=None)
    def test_matches_racah_oracle(self, l, seed):
        rng = np.random.default_rng(seed)
        for j2 in (2 * l - 1, 2 * l + 1):
            if j2 < 0:
                continue
            mj2 = rng.choice(np.arange(-j2, j2 + 1, 2))
            for ms2 in (-1, 1):
                ml2 = mj2 - ms2
                if abs(ml2) > 2 * l:
                    continue
                got = clebsch_gordan(l, ml2 / 2, 0.5, ms2 / 2, j2 / 2, mj2 / 2)
                want = racah_cg(l, ml2 / 2, 0.5, ms2 / 2, j2 / 2, mj2 / 2)
                assert got == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("l,s", [(1, 0.5), (2, 0.5), (3, 1.0), (5, 1.5)])
    def test_orthogonality(self, l, s):
        # sum_{ml,ms} <l ml s ms|j mj><l ml s ms|j' mj> = delta_jj'
        two_s = int(round(2 * s))
        js = [j2 / 2 for j2 in range(int(2 * abs(l - s)), int(2 * (l + s)) + 1, 2)]
        for j in js:
            for jp in js:
                mj = min(j, jp) - int(min(j, jp))  # 0 or 0.5
                acc = 0.0
                for ml in range(-l, l + 1):
                    for ms2 in range(-two_s, two_s + 1, 2):
                        ms = ms2 / 2
                        if abs(ml + ms - mj) > 1e-9:
                            continue
                        acc += (clebsch_gordan(l, ml, s, ms, j, mj)
                                * clebsch_gordan(l, ml, s, ms, jp, mj))
                assert acc == pytest.approx(1.0 if j == jp else 0.0, abs=1e-13)

    def test_large_j_no_overflow(self):
        # well beyond |kappa| ~ 100: j up to 250 stays exact
        val = clebsch_gordan(250, 0, 0.5, 0.5, 250.5, 0.5)
        assert 0.0 < val < 1.0
        norm = val ** 2 + clebsch_gordan(250, 1, 0.5, -0.5, 250.5, 0.5) ** 2
        assert norm == pytest.approx(1.0, abs=1e-13)


@pytest.fixture(scope="module")
def ang_quad():
    return AngularQuadrature()


class TestPhotonWeights:
    def test_triangle_zero(self):
        a, n = kappa_to_channel(-1), kappa_to_channel(-1)
        assert photon_angular_weight(5, a, n, "temporal") == 0.0
        assert photon_angular_weight(5, a, n, "spatial") == 0.0

    def test_monopole_value(self, ang_quad):
        # J=0 temporal between two s_1/2 channels: 2 x |Y_00 norm|^2 = 1/(2 pi)
        a = kappa_to_channel(-1)
        got = photon_angular_weight(0, a, a, "temporal")
        want = ang_quad.temporal(0, -1, -1)[0]
        assert got == pytest.approx(want, rel=1e-10)
        assert got == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)

    def test_invalid_vertex(self):
        a = kappa_to_channel(-1)
        with pytest.raises(ValueError):
            photon_angular_weight(0, a, a, "longitudinal")

    @pytest.mark.parametrize("ka", [-1, 1, -2])
    @pytest.mark.parametrize("kn", [-4, -3, -2, -1, 1, 2, 3, 4])
    def test_against_quadrature_oracle(self, ang_quad, ka, kn):
        for J in multipole_range(kappa_to_channel(ka), kappa_to_channel(kn)):
            got_t = temporal_coefficients(J, ka, kn)
            want_t = ang_quad.temporal(J, ka, kn)
            got_s = spatial_coefficients(J, ka, kn)
            want_s = ang_quad.spatial(J, ka, kn)
            for g, w in list(zip(got_t, want_t)) + list(zip(got_s, want_s)):
                assert g == pytest.approx(w, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("J,ka,kn", [(0, -1, -1), (1, -1, 2), (2, -2, 3)])
    def test_swap_symmetry(self, ang_quad, J, ka, kn):
        a, n = kappa_to_channel(ka), kappa_to_channel(kn)
        w1 = photon_angular_weight(J, a, n, "temporal")
        w2 = photon_angular_weight(J, n, a, "temporal")
        assert w1 == pytest.approx(w2, rel=1e-10, abs=1e-12)
        # swapping the channels exchanges the two current elements
        # (adjoint relation), so the spatial triple maps onto itself
        # with the large-small and small-large weights interchanged
        pq1, x1, qp1 = spatial_coefficients(J, ka, kn)
        pq2, x2, qp2 = spatial_coefficients(J, kn, ka)
        assert pq1 == pytest.approx(qp2, rel=1e-10, abs=1e-12)
        assert qp1 == pytest.approx(pq2, rel=1e-10, abs=1e-12)
        assert x1 == pytest.approx(x2, rel=1e-10, abs=1e-12)

    def test_selection_rules_s_reference(self):
        """For a j_a = 1/2 reference the active vertices per channel are:
        temporal at J = l_n, the large-small current at J = l_bar_n, and a
        small-large current that can extend one multipole past the
        j-triangle; everything else vanishes identically."""
        a = kappa_to_channel(-1)
        for kn in (-3, -2, -1, 1, 2, 3):
            n = kappa_to_channel(kn)
            for J in range(0, n.ell + 4):
                t_pp, t_x, t_qq = temporal_coefficients(J, -1, kn)
                s_pq, s_x, s_qp = spatial_coefficients(J, -1, kn)
                if J == n.ell:
                    assert t_pp > 0.0
                else:
                    assert t_pp == t_x == 0.0
                if J == n.ell_bar:
                    assert s_pq > 0.0
                else:
                    assert s_pq == s_x == 0.0
                # the small-component current element obeys the (l_bar_a, J,
                # l_n) orbital triangle with parity
                allowed_qp = (abs(a.ell_bar - n.ell) <= J <= a.ell_bar + n.ell
                              and (a.ell_bar + n.ell + J) % 2 == 0
                              and abs(a.j2 - n.j2) // 2 - 1 <= J <= (a.j2 + n.j2) // 2 + 1)
                assert (s_qp != 0.0) == allowed_qp

    def test_fixed_mj_share(self):
        # each reference m_j carries an equal share of the all-m sum
        J, ka, kn = 1, -1, -2
        total = temporal_coefficients(J, ka, kn)[0]
        quad = AngularQuadrature(n_theta=40, n_phi=80)
        ja2 = 2 * abs(ka) - 1
        jn2 = 2 * abs(kn) - 1
        for m2a in (-1, 1):
            acc = 0.0
            ca = quad.chi(ka, m2a)
            for m2n in range(-jn2, jn2 + 1, 2):
                cn = quad.chi(kn, m2n)
                for M in range(-J, J + 1):
                    e = quad.dot(ca, quad.ylm(J, M) * cn)
                    acc += abs(e) ** 2
            assert acc == pytest.approx(total / (ja2 + 1.0), rel=1e-10)
