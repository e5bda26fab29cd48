"""Lindblad master equations solved by ket-bra entangled state vectorization."""

from .errors import (
    ConfigError,
    KbesError,
    ModelValidationError,
    NotCompletelyPositiveError,
    NumericalError,
    SpectralFallbackError,
    SteadyStateError,
)
from .kbes import (
    LindbladModel,
    Liouvillian,
    apply_rhs_direct,
    build_liouvillian,
    devectorize,
    lift_sandwich,
    lindblad_model,
    vec_identity,
    vectorize,
)
from .numkernel import SpectralDecomposition, eig_general, expm, kron, nullspace
from .solvers import (
    ChannelDecomposition,
    Trajectory,
    channel_at,
    choi_of_propagator,
    integrate_rk4,
    kraus_decompose,
    liouvillian_spectrum,
    partial_trace,
    propagate_expm,
    propagate_spectral,
    steady_state,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelDecomposition",
    "ConfigError",
    "KbesError",
    "LindbladModel",
    "Liouvillian",
    "ModelValidationError",
    "NotCompletelyPositiveError",
    "NumericalError",
    "SpectralDecomposition",
    "SpectralFallbackError",
    "SteadyStateError",
    "Trajectory",
    "apply_rhs_direct",
    "build_liouvillian",
    "channel_at",
    "choi_of_propagator",
    "devectorize",
    "eig_general",
    "expm",
    "integrate_rk4",
    "kraus_decompose",
    "kron",
    "lift_sandwich",
    "lindblad_model",
    "liouvillian_spectrum",
    "nullspace",
    "partial_trace",
    "propagate_expm",
    "propagate_spectral",
    "steady_state",
    "vec_identity",
    "vectorize",
]
