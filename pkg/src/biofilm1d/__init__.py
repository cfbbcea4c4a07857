"""One-dimensional four-phase biofilm mixture model as a hyperbolic balance law."""

from .dissipativity import (
    DissipativityReport,
    EquilibriumPoint,
    dissipation_matrix,
    equilibrium,
    is_totally_dissipative,
    param_family,
    rh_check,
    rh_coefficients,
    sweep,
    symmetrized_A0D,
)
from .model import (
    FAST,
    TABLE1,
    ModelParams,
    PhaseState,
    ReactionVector,
    delta,
    eigenvalues,
    eta,
    flux,
    in_hyperbolic_domain,
    jacobian,
    liquid_fraction,
    liquid_velocity,
    reaction,
    symmetrizer,
)

__version__ = "0.1.0"
