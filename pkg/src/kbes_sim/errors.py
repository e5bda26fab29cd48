"""Exception hierarchy. The CLI maps these onto exit codes."""

from __future__ import annotations


class KbesError(Exception):
    pass


class ModelValidationError(KbesError, ValueError):
    """A model or parameter set violates a physical invariant."""


class NumericalError(KbesError, ArithmeticError):
    """A numerical routine could not deliver a trustworthy answer."""


class SpectralFallbackError(NumericalError):
    """The Liouvillian eigenbasis is defective or too ill-conditioned; use expm."""

    def __init__(self, condition_estimate: float):
        self.condition_estimate = condition_estimate
        super().__init__(
            f"eigenvector basis is ill-conditioned (cond ~ {condition_estimate:.3g}); "
            "spectral propagation is unreliable, use the expm solver instead"
        )


class SteadyStateError(NumericalError):
    """The zero eigenspace is empty or degenerate.

    ``basis`` holds the devectorized null-space basis (possibly empty).
    """

    def __init__(self, message: str, basis=()):
        self.basis = list(basis)
        super().__init__(message)


class NotCompletelyPositiveError(NumericalError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"Choi matrix has eigenvalue {min_eigenvalue:.3g} below -tol; "
            "the map is not completely positive"
        )


class ConfigError(KbesError, ValueError):
    """Malformed or invalid run configuration. ``problems`` maps field -> message."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in self.problems.items())
        super().__init__(f"invalid configuration: {detail}")
