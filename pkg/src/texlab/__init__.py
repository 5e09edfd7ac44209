"""texlab: numerical laboratory for state-texture resource theories.

Computes rugosity-style measures against arbitrary free sets, simulates the
randomized-input CNOT identification protocol, generates random fixed-point
free operations, and evaluates convex-roof measures with a differential-
evolution global search.
"""

__version__ = "0.1.0"

from .channels import (
    KrausChannel,
    apply,
    channel_from_json,
    channel_to_json,
    complete_dephasing,
    compose,
    depolarize_to,
    filter_channel,
    kraus_outcomes,
    random_fixed_point_channel,
)
from .de import DEResult, OptimizerConfig, differential_evolution
from .errors import (
    DegenerateContinuumError,
    DimensionError,
    InvalidChannelError,
    InvalidStateError,
    NoCandidatesError,
    OptimizationError,
    TexlabError,
    UnsupportedVariantError,
)
from .experiments import (
    ViolationReport,
    WalkRecord,
    default_violation_family,
    gate_id_sweep,
    random_walk_experiment,
    strong_monotonicity_check,
    violation_state,
)
from .gateid import (
    CnotBasis,
    DetectionReport,
    LayerSpec,
    SigmaEstimates,
    closed_form_averages,
    cnot_in_basis,
    detect_cnot,
    failure_basis,
    failure_circle_distance,
    failure_family,
    hadamard_partner,
    monte_carlo_protocol,
    reconstruct_basis_candidates,
)
from .linalg import (
    BlochVector,
    DensityMatrix,
    PureState,
    Rng,
    basis_ket,
    bloch_from_qubit,
    fidelity,
    haar_random_pure,
    haar_random_unitary,
    partial_trace,
    qubit_from_bloch,
    random_density_matrix,
    rotation_gate,
    sqrt_fidelity,
    uniform_superposition,
)
from .measures import (
    FreeSet,
    MeasureValue,
    lower_bound_measure,
    pure_rugosity,
    qubit_coherence,
    qubit_imaginarity,
    rugosity_single,
    sigma_functional,
)
from .roof import (
    Ensemble,
    RoofResult,
    RoofTrials,
    convex_roof,
    hjw_decomposition,
    repeated_convex_roof,
    roof_result_to_dict,
    semi_unitary_from_vector,
)
