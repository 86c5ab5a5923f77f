"""Output fields of a cavity optomechanical system with a coherent mechanical pump."""

from omfields.errors import (
    BistableAmbiguity,
    DegenerateSideband,
    DivisionByZeroDrive,
    GridTooNarrow,
    IncommensurateWindow,
    NotConverged,
    NumericalError,
    PhaseSingularity,
    ResonanceMismatch,
    Unstable,
    ValidationError,
)
from omfields.model import (
    DriveConfig,
    OutputFields,
    ResponseCoefficients,
    SteadyState,
    SystemParams,
    ValidationReport,
    experiment_params,
    reduce_phase,
    validate,
)
from omfields.response import (
    combined_fields,
    normalized_outputs,
    output_fields,
    probe_coefficients,
    pump_coefficients,
    response_coefficients,
    steady_state,
    susceptibility,
)

__version__ = "0.1.0"

__all__ = [
    "BistableAmbiguity",
    "DegenerateSideband",
    "DivisionByZeroDrive",
    "DriveConfig",
    "GridTooNarrow",
    "IncommensurateWindow",
    "NotConverged",
    "NumericalError",
    "OutputFields",
    "PhaseSingularity",
    "ResonanceMismatch",
    "ResponseCoefficients",
    "SteadyState",
    "SystemParams",
    "Unstable",
    "ValidationError",
    "ValidationReport",
    "combined_fields",
    "normalized_outputs",
    "output_fields",
    "experiment_params",
    "probe_coefficients",
    "pump_coefficients",
    "reduce_phase",
    "response_coefficients",
    "steady_state",
    "susceptibility",
    "validate",
]
