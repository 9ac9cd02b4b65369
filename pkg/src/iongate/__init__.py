"""Simulation of a dissipation-assisted phase gate and SWAP for two cold trapped ions."""
from .evolve import EvolutionResult, IntegrationError, check_truncation, evolve, project_phonon_ground
from .gates import (
    GateReport,
    Mode,
    adiabatic_oracle,
    analytic_fidelity,
    analytic_success,
    ideal_gate,
    perturbative_leakage,
    run_gate,
)
from .hamiltonian import (
    GateKind,
    GateParams,
    Operator,
    build_coherent,
    build_conditional_phase,
    build_conditional_swap,
    build_effective,
)
from .hilbert import BasisIndex, NamedState, Space, StateVector, basis_state, make_space, named_state, qubit_state

__version__ = "0.1.0"
