"""Non-Hermitian lattice laboratory for exceptional points of order N."""

from .dynamics import (
    EvolutionConfig,
    TrajectoryRecord,
    convergence_time,
    evolve,
    exact_nilpotent_propagator,
    growth_exponent,
)
from .epn import (
    EPReport,
    JordanChain,
    PathVerdict,
    adiabatic_path_check,
    epn_check,
    jordan_chain,
    nilpotency_index,
)
from .lattice import (
    DisorderSpec,
    HamiltonianFamily,
    LatticeSpec,
    TimeDependentCouplingSpec,
    build_hamiltonian,
    family_at,
    reversal_conjugate,
    sample_disorder,
)

__version__ = "0.1.0"
