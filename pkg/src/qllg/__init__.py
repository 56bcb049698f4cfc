"""Structure-preserving solver for the quantum Landau-Lifshitz-Gilbert equation."""

from .dynamics import QllgContext, QllgRhs, qllg_rhs, sylvester_diagonal_solve
from .integrators import (
    ButcherTableau,
    IntegratorConfig,
    TrajectoryRecord,
    conservative_rk_step,
    integrate,
    preset_tableau,
    reference_spectrum,
    rk_step,
    spectral_projection,
)
from .linalg import (
    SpectralDecomposition,
    commutator,
    diagnostics,
    hermitian_eigendecomposition,
    kron,
    partial_trace,
)
from .observables import concurrence, expectation, magnetization, spin_flip, two_spin_concurrence
from .oracle import brute_force_rhs, convergence_study, exact_rank1_solution
from .spin_model import (
    Bond,
    HamiltonianSpec,
    InitialStateSpec,
    LatticeSpec,
    PhysicalConstants,
    af_state,
    build_bonds,
    build_hamiltonian,
    build_initial_state,
    build_spin_operators,
    ghz_state,
    hamiltonian_from_spec,
    w_state,
)

__version__ = "0.1.0"

__all__ = [
    "Bond",
    "ButcherTableau",
    "HamiltonianSpec",
    "InitialStateSpec",
    "IntegratorConfig",
    "LatticeSpec",
    "PhysicalConstants",
    "QllgContext",
    "QllgRhs",
    "SpectralDecomposition",
    "TrajectoryRecord",
    "af_state",
    "brute_force_rhs",
    "build_bonds",
    "build_hamiltonian",
    "build_initial_state",
    "build_spin_operators",
    "commutator",
    "concurrence",
    "conservative_rk_step",
    "convergence_study",
    "diagnostics",
    "exact_rank1_solution",
    "expectation",
    "ghz_state",
    "hamiltonian_from_spec",
    "hermitian_eigendecomposition",
    "integrate",
    "kron",
    "magnetization",
    "partial_trace",
    "preset_tableau",
    "qllg_rhs",
    "reference_spectrum",
    "rk_step",
    "spectral_projection",
    "spin_flip",
    "sylvester_diagonal_solve",
    "two_spin_concurrence",
    "w_state",
]
