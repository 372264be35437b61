"""Clock Hamiltonians for quantum circuits: promise-gap certification and
simulation of the randomized term-testing verifier."""

from .circuit import (
    Circuit,
    CircuitError,
    Gate,
    acceptance_probability,
    apply_gate,
    load_circuit,
    parse_circuit,
    prefix_state,
    start_state,
)
from .estimator import GapEstimator, VerifierEstimator
from .hamiltonian import (
    CircuitHamiltonian,
    HamiltonianTerm,
    apply_hamiltonian,
    apply_term,
    build_hamiltonian,
    energy,
    history_state,
    materialize_dense,
)
from .revcomp import (
    ReversibleCircuit,
    TruthTable,
    compile_truth_table,
    end_to_end_instance,
    verify_reversibility,
)
from .spectral import (
    SpectralReport,
    gap_report,
    min_eigenvalue_dense,
    min_eigenvalue_iterative,
)
from .verifier import (
    TestSlot,
    VerifierTranscript,
    monte_carlo,
    projective_test,
    propagation_test,
    rejection_probability_exact,
    run_verifier,
    sample_slot,
)

__version__ = "0.1.0"
