"""Dwell-time certificates and exact simulation for switched systems with distinct stable equilibria."""

from .errors import (
    DwellCertError,
    InvalidLevels,
    NonFiniteState,
    NotHurwitz,
    SignConditionViolated,
    UnknownModeId,
    WeightMismatch,
)
from .neuron import Certificate, NeuronParams, certify, neuron_modes, square_wave_signal
from .planar_affine import (
    PlanarAffineMode,
    QuadraticLyapunov,
    SublevelSet,
    dwell_time,
    dwell_time_weak,
    enclosing_level,
    enclosing_level_general,
    enclosing_level_shared,
    equilibrium,
    evaluate,
    lyapunov,
    min_dwell_schedule,
    touching_level_inner,
    validate_mode,
)
from .sim import (
    ResetRule,
    SwitchingSignal,
    Trajectory,
    TrapReport,
    affine_flow,
    detect_crossing,
    matrix_exp_2x2,
    periodic_signal,
    simulate,
    verify_trapping,
)

__version__ = "0.1.0"

__all__ = [
    "DwellCertError",
    "InvalidLevels",
    "NonFiniteState",
    "NotHurwitz",
    "SignConditionViolated",
    "UnknownModeId",
    "WeightMismatch",
    "Certificate",
    "NeuronParams",
    "certify",
    "neuron_modes",
    "square_wave_signal",
    "PlanarAffineMode",
    "QuadraticLyapunov",
    "SublevelSet",
    "dwell_time",
    "dwell_time_weak",
    "enclosing_level",
    "enclosing_level_general",
    "enclosing_level_shared",
    "equilibrium",
    "evaluate",
    "lyapunov",
    "min_dwell_schedule",
    "touching_level_inner",
    "validate_mode",
    "ResetRule",
    "SwitchingSignal",
    "Trajectory",
    "TrapReport",
    "affine_flow",
    "detect_crossing",
    "matrix_exp_2x2",
    "periodic_signal",
    "simulate",
    "verify_trapping",
]
