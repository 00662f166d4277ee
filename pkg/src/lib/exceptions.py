"""Custom exception hierarchy for hybridqed."""

from typing import Any


class HybridQEDException(Exception):
    """Base exception for all hybridqed errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize exception with message and optional details."""
        self.message = message
        self.details = details or {}
        super().__init__(message)


class ValidationError(HybridQEDException):
    """Raised when system or drive parameters violate an invariant."""

    pass


class ConfigurationError(HybridQEDException):
    """Raised when a configuration file cannot be read or parsed."""

    pass


class PresetNotFoundError(HybridQEDException):
    """Raised when a requested preset or variant does not exist."""

    pass


class ConvergenceError(HybridQEDException):
    """Raised when the steady-state root fails its residual check."""

    pass


class DegenerateParameterError(HybridQEDException):
    """Raised when parameters hit an exact degeneracy (e.g. M(delta) = 0)."""

    pass


class SingularSystemError(HybridQEDException):
    """Raised when a closed-form denominator or a linear system is singular."""

    pass


class QuadratureError(HybridQEDException):
    """Raised when a spectral integral misses its accuracy target."""

    pass


class IntegrationError(HybridQEDException):
    """Raised when time-domain integration fails or diverges."""

    pass


class DemodulationError(HybridQEDException):
    """Raised when sideband demodulation is ill-conditioned."""

    pass


class OutputError(HybridQEDException):
    """Raised when writing result files fails."""

    pass
