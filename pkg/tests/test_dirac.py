import math

import numpy as np
import pytest
import scipy.linalg

from qedse.basis import BasisSpec, build_basis, overlap, rkb_small_component
from qedse.dirac import (
    RadialSpectrum,
    assemble_matrices,
    exact_dirac_coulomb_energy,
    solve_channel,
    solve_spectrum,
)

from conftest import ALPHA_INV, Z_URANIUM
from oracles import quad_radial


class TestExactEnergy:
    def test_free_limit(self):
        assert exact_dirac_coulomb_energy(1, -1, 0.0, ALPHA_INV) == 1.0

    def test_ground_state_uranium(self):
        za = Z_URANIUM / ALPHA_INV
        want = math.sqrt(1.0 - za * za)
        got = exact_dirac_coulomb_energy(1, -1, Z_URANIUM, ALPHA_INV)
        assert got == pytest.approx(want, rel=1e-15)
        assert got == pytest.approx(0.741135, abs=1e-6)

    def test_kappa_degeneracy(self):
        e_minus = exact_dirac_coulomb_energy(2, -1, Z_URANIUM, ALPHA_INV)
        e_plus = exact_dirac_coulomb_energy(2, 1, Z_URANIUM, ALPHA_INV)
        assert e_minus == pytest.approx(e_plus, rel=1e-15)

    def test_rejects_supercritical(self):
        with pytest.raises(ValueError):
            exact_dirac_coulomb_energy(1, -1, 140.0, ALPHA_INV)

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            exact_dirac_coulomb_energy(1, -2, 10.0, ALPHA_INV)


class TestAssembly:
    def test_hamiltonian_symmetric(self, small_spec):
        h, s = assemble_matrices(small_spec)
        assert np.array_equal(h, h.T)
        assert np.array_equal(s, s.T)

    def test_free_diagonal_blocks(self, small_spec):
        # with the potential off, the diagonal blocks are +-mc^2 overlaps
        spec = small_spec.replace(Z=0.0)
        h, s = assemble_matrices(spec)
        nb = spec.n_b
        assert np.allclose(h[:nb, :nb], s[:nb, :nb], rtol=0, atol=1e-15)
        assert np.allclose(h[nb:, nb:], -s[nb:, nb:], rtol=0, atol=1e-15)

    def test_overlap_against_quadrature(self, small_spec):
        h, s = assemble_matrices(small_spec)
        basis = build_basis(small_spec)
        smalls = [rkb_small_component(g, small_spec.kappa) for g in basis]
        nb = small_spec.n_b
        for i, j in ((0, 0), (0, 3), (2, 5)):
            gi, gj = basis[i], basis[j]
            want = quad_radial(
                lambda r: (gi.norm * r ** gi.power * np.exp(-gi.exponent * r * r))
                * (gj.norm * r ** gj.power * np.exp(-gj.exponent * r * r)),
                upper=40.0 / math.sqrt(min(gi.exponent, gj.exponent)))
            assert s[i, j] == pytest.approx(want, rel=1e-12)
            want_q = quad_radial(
                lambda r: smalls[i](r) * smalls[j](r),
                upper=40.0 / math.sqrt(min(gi.exponent, gj.exponent)))
            assert s[nb + i, nb + j] == pytest.approx(want_q, rel=1e-12)


class TestSpectrum:
    def test_uranium_ground_energy(self, uranium_1s):
        want = exact_dirac_coulomb_energy(1, -1, Z_URANIUM, ALPHA_INV)
        got = uranium_1s.energies[uranium_1s.bound_index()]
        assert abs(got - want) / want < 1e-9

    def test_free_gap(self, free_spectra):
        for sp in free_spectra.values():
            assert np.all(np.abs(sp.energies) >= 1.0 - 1e-8)
            assert np.sum(sp.energies > 0) == sp.n_b

    def test_hydrogen_ground_energy(self, small_spec):
        sp = solve_channel(small_spec.replace(Z=1.0, n_b=60))
        want = exact_dirac_coulomb_energy(1, -1, 1.0, ALPHA_INV)
        got = sp.energies[sp.bound_index()]
        assert abs(got - want) / want < 1e-9

    def test_orthonormality(self, uranium_spec, uranium_1s):
        h, s = assemble_matrices(uranium_spec)
        gram = uranium_1s.coeffs.T @ s @ uranium_1s.coeffs
        assert np.abs(gram - np.eye(gram.shape[0])).max() < 1e-10

    def test_resolution_of_identity(self, uranium_spec, uranium_1s):
        h, s = assemble_matrices(uranium_spec)
        ident = uranium_1s.coeffs @ uranium_1s.coeffs.T @ s
        assert np.abs(ident - np.eye(ident.shape[0])).max() < 1e-8

    def test_variational_monotonicity(self, uranium_spec):
        energies = []
        for nb in (20, 40, 60, 80, 100):
            sp = solve_channel(uranium_spec.replace(n_b=nb))
            energies.append(sp.energies[sp.bound_index()])
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-12)

    def test_no_spurious_states(self, uranium_spec):
        e_1s = exact_dirac_coulomb_energy(1, -1, Z_URANIUM, ALPHA_INV)
        for kappa in (-1, 1):
            for nb in (40, 100):
                sp = solve_channel(uranium_spec.replace(kappa=kappa, n_b=nb))
                inside = (sp.energies > e_1s - 0.5) & (sp.energies < e_1s - 1e-6)
                assert not np.any(inside)

    def test_deterministic_sign_convention(self, small_spec):
        a = solve_channel(small_spec)
        b = solve_channel(small_spec)
        assert np.array_equal(a.energies, b.energies)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_high_kappa_smoke(self, uranium_spec):
        sp = solve_channel(uranium_spec.replace(kappa=-50))
        assert np.all(np.isfinite(sp.energies))
        want = exact_dirac_coulomb_energy(50, -50, Z_URANIUM, ALPHA_INV)
        got = sp.energies[sp.bound_index()]
        assert abs(got - want) / want < 1e-6
        h, s = assemble_matrices(uranium_spec.replace(kappa=-50))
        gram = sp.coeffs.T @ s @ sp.coeffs
        assert np.abs(gram - np.eye(gram.shape[0])).max() < 1e-8

    def test_canonical_fallback_on_singular_overlap(self, small_spec):
        # duplicate a basis function by hand: Cholesky fails, the canonical
        # orthogonalization path drops the dependent direction
        h, s = assemble_matrices(small_spec)
        h2 = h.copy()
        s2 = s.copy()
        h2[1] = h2[0]
        h2[:, 1] = h2[:, 0]
        s2[1] = s2[0]
        s2[:, 1] = s2[:, 0]
        with pytest.raises(scipy.linalg.LinAlgError):
            scipy.linalg.cholesky(s2)
        spectrum = solve_spectrum(h2, s2, small_spec)
        assert np.all(np.isfinite(spectrum.energies))
        assert spectrum.energies.size < 2 * small_spec.n_b

    def test_radial_functions_normalized(self, uranium_1s):
        idx = uranium_1s.bound_index()
        r = np.linspace(1e-6, 60.0, 40000)
        p, q = uranium_1s.radial_functions(idx, r)
        norm = np.trapezoid(p * p + q * q, r)
        assert norm == pytest.approx(1.0, abs=1e-6)
