import logging

import pytest

from qedse.basis import BasisSpec
from qedse.dirac import solve_channel
from qedse.photon_pw import kgrid_level, reference_state

logging.getLogger("qedse").setLevel(logging.ERROR)

ALPHA_INV = 137.0359895
Z_URANIUM = 92.0


@pytest.fixture(scope="session")
def uranium_spec():
    return BasisSpec.from_bohr(kappa=-1, zeta1_bohr=0.01, beta_ratio=1.5,
                               n_b=100, Z=Z_URANIUM, alpha_inv=ALPHA_INV)


@pytest.fixture(scope="session")
def uranium_1s(uranium_spec):
    return solve_channel(uranium_spec)


@pytest.fixture(scope="session")
def uranium_ref(uranium_1s):
    return reference_state(uranium_1s)


@pytest.fixture(scope="session")
def free_spectra(uranium_spec):
    """Free (Z = 0) spectra for the low channels, keyed by kappa."""
    return {k: solve_channel(uranium_spec.replace(kappa=k, Z=0.0))
            for k in (-2, -1, 1, 2)}


@pytest.fixture(scope="session")
def bound_spectra(uranium_spec, uranium_1s):
    out = {k: solve_channel(uranium_spec.replace(kappa=k))
           for k in (-2, 1, 2)}
    out[-1] = uranium_1s
    return out


@pytest.fixture(scope="session")
def grid_l1():
    return kgrid_level(1)


@pytest.fixture(scope="session")
def small_spec():
    """Cheap basis for structural tests that do not need table accuracy."""
    return BasisSpec.from_bohr(kappa=-1, zeta1_bohr=0.01, beta_ratio=1.5,
                               n_b=30, Z=Z_URANIUM, alpha_inv=ALPHA_INV)
