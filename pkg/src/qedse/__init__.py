"""All-order one-loop self-energy of hydrogen-like ions in a Gaussian basis.

The package evaluates the dimensionless self-energy function F(Z alpha) of
a one-electron ion to all orders in the nuclear Coulomb field: the
finite (many-potential) part from partial-wave spectral sums over an
even-tempered Gaussian basis, and the renormalized zero- and one-potential
parts in momentum space.
"""

from .basis import ALPHA_INV_REFERENCE, BasisSpec
from .config import RunConfig
from .dirac import exact_dirac_coulomb_energy, solve_channel
from .mp_assembly import SelfEnergyReport, from_F_units, to_F_units
from .pipeline import run_report

__version__ = "0.1.0"

__all__ = [
    "ALPHA_INV_REFERENCE",
    "BasisSpec",
    "RunConfig",
    "SelfEnergyReport",
    "exact_dirac_coulomb_energy",
    "solve_channel",
    "to_F_units",
    "from_F_units",
    "run_report",
    "__version__",
]
