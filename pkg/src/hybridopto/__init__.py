"""Optical bistability and covariance cooling in a hybrid optomechanical system."""

__version__ = "0.1.0"

from .bistability import (
    SteadyStateSolution,
    TurningPoints,
    bistable_window,
    is_bistable,
    solve_params,
    steady_state_roots,
    threshold_power,
    turning_points,
)
from .cooling import (
    LinearizedParams,
    LinearizedSystem,
    MomentState,
    Trajectory,
    build_linearized_system,
    evolve_moments,
    stability_spectrum,
    steady_state_moments,
)
from .errors import (
    HybridOptoError,
    IntegrationError,
    NoSteadyStateError,
    NoThresholdError,
    ParameterError,
    SingularResponseError,
)
from .kernels import BACKEND
from .params import (
    DimensionlessParams,
    EffectiveCavityResponse,
    PhysicalParams,
    atomic_cavity_steady_state,
    drive_amplitude,
    effective_response,
    scaled_coupling,
    to_dimensionless,
)
from .sweeps import SweepTrace, ThresholdMap, detuning_sweep, power_sweep, threshold_map

__all__ = [
    "__version__",
    "SteadyStateSolution",
    "TurningPoints",
    "bistable_window",
    "is_bistable",
    "solve_params",
    "steady_state_roots",
    "threshold_power",
    "turning_points",
    "LinearizedParams",
    "LinearizedSystem",
    "MomentState",
    "Trajectory",
    "build_linearized_system",
    "evolve_moments",
    "stability_spectrum",
    "steady_state_moments",
    "HybridOptoError",
    "IntegrationError",
    "NoSteadyStateError",
    "NoThresholdError",
    "ParameterError",
    "SingularResponseError",
    "DimensionlessParams",
    "EffectiveCavityResponse",
    "PhysicalParams",
    "atomic_cavity_steady_state",
    "drive_amplitude",
    "effective_response",
    "scaled_coupling",
    "to_dimensionless",
    "BACKEND",
    "SweepTrace",
    "ThresholdMap",
    "detuning_sweep",
    "power_sweep",
    "threshold_map",
]
