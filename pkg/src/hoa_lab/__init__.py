"""Propagator-stencil toolkit: represent a Hamiltonian through combinations
of its own time-evolution operators, measure energies from overlaps, and
prepare ground states by direct iteration or filter diagonalization."""

__version__ = "0.1.0"

from .hamiltonian import (
    PauliSum,
    PauliTerm,
    SpectralBound,
    heisenberg,
    hubbard_2x2_jw,
    load_pauli_file,
    save_pauli_file,
    spectral_bound,
    to_dense,
)
from .hoa import ErrorBudget, HoaConfig, error_budget, hoa_apply, hoa_expectation, hoa_power_expectation
from .ground_solvers import (
    DirectIterationConfig,
    QfdConfig,
    QfdResult,
    direct_iteration,
    qfd_build,
    solve_generalized,
    unique_overlap_count,
)
from .measurement import OverlapEstimate, SampledEnergy, sample_overlap_part, sampled_hoa_energy
from .noise import NoiseConfig, mcwf_evolve, noisy_hoa_energy
from .statevector import (
    Propagator,
    StateVector,
    apply_operator,
    basis_state,
    evolve,
    expectation,
    overlap,
    uniform_state,
)
from .stencil import StencilScheme, stencil_coefficients, truncation_constant
from .trotter import (
    GateSequence,
    HeisenbergParams,
    TrotterPlan,
    apply_sequence,
    compile_trotter,
    gate_count_report,
    trotterized_hoa_energy,
)
from .vqe import AdamState, ParamCircuit, build_circuit, energy, gate_count, parameter_shift_gradient, vqe_run
