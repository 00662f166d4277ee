"""Parameter checks and derived detunings for the hybrid system."""

from src.lib.config import settings
from src.lib.exceptions import ValidationError
from src.lib.logger import get_logger
from src.models.params import Detunings, Diagnostic, DriveConfig, Severity, SystemParams

logger = get_logger(__name__)

_POSITIVE_FIELDS = (
    ("omega_cavity", "cavity frequency"),
    ("omega_qubit", "qubit frequency"),
    ("omega_mech", "mechanical frequency"),
    ("gamma_cavity", "cavity damping rate"),
    ("gamma_qubit", "qubit decoherence rate"),
    ("gamma_mech", "mechanical damping rate"),
    ("mass", "mass"),
)


def derive_detunings(params: SystemParams, drive: DriveConfig) -> Detunings:
    """Detunings of cavity, qubit and probe from the drive frequency."""
    return Detunings(
        delta1=params.omega_cavity - drive.omega_drive,
        delta2=params.omega_qubit - drive.omega_drive,
        delta=drive.omega_probe - drive.omega_drive,
    )


def validate_params(
    params: SystemParams,
    drive: DriveConfig,
    *,
    probe: bool = False,
    statistics: bool = False,
) -> list[Diagnostic]:
    """
    Check a parameter set against the model invariants.

    Args:
        params: System parameters
        drive: Drive configuration
        probe: A probe response is about to be computed
        statistics: A g2 computation is about to run (probe must be off)

    Returns:
        Diagnostics; an empty list means the parameter set is clean
    """
    diagnostics: list[Diagnostic] = []

    def error(field: str, message: str) -> None:
        diagnostics.append(Diagnostic(severity=Severity.ERROR, field=field, message=message))

    def warning(field: str, message: str) -> None:
        diagnostics.append(Diagnostic(severity=Severity.WARNING, field=field, message=message))

    for name, label in _POSITIVE_FIELDS:
        if not getattr(params, name) > 0:
            error(name, f"{label} must be positive")

    if params.chi < 0:
        error("chi", "chi must be nonnegative")
    if params.g_qubit < 0:
        error("g_qubit", "g_qubit must be nonnegative")
    if not -1.0 <= params.sigma_z_ss <= 1.0:
        error("sigma_z_ss", "sigma_z_ss must lie in [-1, 1]")

    if drive.big_omega < 0:
        error("big_omega", "drive amplitude must be nonnegative")
    if drive.epsilon < 0:
        error("epsilon", "probe amplitude must be nonnegative")
    if drive.temperature < 0:
        error("temperature", "temperature must be nonnegative")

    if drive.big_omega > 0 and drive.epsilon / drive.big_omega > settings.probe_ratio_warning:
        warning("epsilon", "probe not weak relative to drive")
    elif probe and drive.big_omega == 0 and drive.epsilon > 0:
        warning("epsilon", "probe not weak relative to drive")

    if statistics and drive.epsilon > 0:
        warning("epsilon", "probe amplitude is ignored by the statistics calculation")

    return diagnostics


def ensure_valid(
    params: SystemParams,
    drive: DriveConfig,
    *,
    probe: bool = False,
    statistics: bool = False,
) -> list[Diagnostic]:
    """
    Validate parameters, logging warnings and raising on errors.

    Returns:
        The warning diagnostics

    Raises:
        ValidationError: If any error-severity diagnostic is present
    """
    diagnostics = validate_params(params, drive, probe=probe, statistics=statistics)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    warnings = [d for d in diagnostics if d.severity is Severity.WARNING]

    for w in warnings:
        logger.warning(f"Parameter warning: {w}")

    if errors:
        raise ValidationError(
            "; ".join(f"{d.field}: {d.message}" for d in errors),
            details={"diagnostics": [d.model_dump(mode="json") for d in diagnostics]},
        )

    return warnings
