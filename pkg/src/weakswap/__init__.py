"""Projective and commuting-POVM qubit measurements from destructive weak swaps."""

__version__ = "0.1.0"

from .construction import (  # noqa: E402
    COMPUTATIONAL,
    AncillaBasis,
    BasisParams,
    StepOperators,
    basis_vectors,
    build_step_operators,
    canonicalize_basis,
    dilation_residual,
    kraus_from_ancilla,
    polar_unitary,
    povm_eigenvalues,
    select_ancilla_basis,
    weak_swap,
)
from .oracle import (  # noqa: E402
    EnumerationResult,
    convergence_table,
    enumerate_exact,
    recursion_check,
    sum_identities,
)
from .povm import (  # noqa: E402
    CommutingPOVM,
    exact_povm_probs,
    run_povm_measurement,
    sample_final,
    validate_povm,
)
from .trajectory import (  # noqa: E402
    Conclusion,
    RandomStream,
    StepRecord,
    Trajectory,
    basis_convergence_report,
    overlap_from_diagnostics,
    run_boundary_trajectory,
    run_trajectory,
    step,
)
