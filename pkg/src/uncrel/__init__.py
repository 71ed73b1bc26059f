"""Noise, disturbance and uncertainty relations for indirect quantum measurements."""

__version__ = "0.1.0"

from .errors import InternalConsistencyError, NumericError, UncrelError
from .model import (
    MeasurementModel,
    RelationReport,
    Verdict,
    disturbance,
    disturbance_operator,
    evaluate,
    gndur_check,
    heisenberg_nd_check,
    independent_intervention_test,
    noise,
    noise_operator,
    robertson_check,
    uvur_check,
    commutation_identity_residual,
)
from .optics import (
    bae_amplifier,
    five_step_composition,
    noiseless_transducer,
    transducer_params,
)

__all__ = [
    "InternalConsistencyError",
    "MeasurementModel",
    "NumericError",
    "RelationReport",
    "UncrelError",
    "Verdict",
    "bae_amplifier",
    "commutation_identity_residual",
    "disturbance",
    "disturbance_operator",
    "evaluate",
    "five_step_composition",
    "gndur_check",
    "heisenberg_nd_check",
    "independent_intervention_test",
    "noise",
    "noise_operator",
    "noiseless_transducer",
    "robertson_check",
    "transducer_params",
    "uvur_check",
]
