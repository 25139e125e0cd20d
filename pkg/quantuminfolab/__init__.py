__author__ = "quantuminfolab developers"
__version__ = "1.0.0"

from .channels import (
    Channel,
    Ensemble,
    EnsembleItem,
    channel_apply,
    channel_compose,
    channel_create,
    coherent_information,
    holevo_chi,
    preset_channel,
    stinespring_dilation,
)
from .config import Settings, configure, get_settings, reset_settings
from .core import (
    DensityMatrix,
    ProbabilityVector,
    PureState,
    Subsystem,
    SystemKind,
    SystemRegistry,
    Unitary,
    apply_unitary,
    extend_fresh,
    partial_trace,
    purify,
    random_haar_unitary,
    random_state,
    registry_create,
    tensor,
)
from .entropy import (
    EntropyValue,
    classicize,
    diagonal_distribution,
    directed_entanglement,
    mutual_information_rv,
    shannon,
    thermodynamic_entropy,
    von_neumann,
)
from .protocols import (
    CascadeConfig,
    KnowledgeSetup,
    MeasurementSpec,
    add_observer,
    cascade_statistics,
    check_zeroth_law,
    simulate_cascade,
    simulate_classical_communication,
    simulate_dpi_chain,
    simulate_measurement,
    simulate_preparation,
)
from .reports import CheckResult, ExperimentReport
from .suite import (
    PropertyCheckConfig,
    SuiteReport,
    check_property,
    default_suite,
    run_suite,
)
