"""Six-photon graph states: fusion simulation, noise, sampling and witnesses."""

from .counting import (
    CountRecord,
    EstimatedValue,
    fringe_scan,
    fringe_visibility,
    outcome_distribution,
    calibrated_noise,
    parity_expectation,
    run_protocol,
    sample_counts,
)
from .graphs import (
    Graph,
    StabilizerSet,
    graph_to_state,
    lu_hadamard_equivalent,
    named_graph,
    stabilizer_generators,
    stabilizers_of_c6,
)
from .optics import (
    FusionOutcome,
    NoiseModel,
    SetupConfig,
    build_setup,
    epr_pair,
    higher_order_coincidences,
    pbs_fusion,
    waveplate_unitary,
)
from .qalgebra import (
    MixedState,
    Observable,
    PauliString,
    PureState,
    cluster6,
    cluster6_tilde,
    expectation,
    ghz_state,
    min_eigenvalue,
    partial_trace,
    phi_plus,
    tensor,
)
from .witness import (
    MeasurementSetting,
    WitnessPlan,
    WitnessReport,
    cluster_witness_plan,
    fidelity_from_witness,
    ghz_witness_plan,
    noise_threshold,
    validate_witness,
)

__version__ = "0.1.0"
