"""TOML configuration files describing a parameter set and its variants."""

import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from src.lib.config import settings
from src.lib.exceptions import ConfigurationError
from src.lib.logger import get_logger
from src.models.params import (
    DriveConfig,
    GridSpec,
    SystemParams,
    TauGridSpec,
    caption_to_angular,
)
from src.models.presets import Preset, PresetVariant

logger = get_logger(__name__)

# Fields converted by 2*pi when the file is written in Hz
_FREQUENCY_FIELDS = frozenset(
    {
        "omega_cavity",
        "omega_qubit",
        "omega_mech",
        "gamma_cavity",
        "gamma_qubit",
        "gamma_mech",
        "g_qubit",
        "omega_drive",
        "omega_probe",
        "big_omega",
        "epsilon",
    }
)


class ConfigFile(BaseModel):
    """
    Raw shape of a configuration file.

    Example:
        angular = false
        [system]
        omega_cavity = 5e9
        ...
        [drive]
        omega_drive = 4.99e9
        [variants.iii]
        g_qubit = 41.7e6
        chi = 2.8e-14
    """

    model_config = ConfigDict(extra="forbid")

    angular: bool = True
    chi_literal: bool | None = None
    summary: str = ""
    system: dict[str, float]
    drive: dict[str, float]
    variants: dict[str, dict[str, float]] = Field(default_factory=dict)
    grid: dict[str, float] | None = None
    tau_grid: dict[str, float | bool] | None = None


def _to_internal(values: dict[str, float], angular: bool, chi_literal: bool) -> dict[str, float]:
    if angular:
        return dict(values)
    converted: dict[str, float] = {}
    for key, value in values.items():
        if key in _FREQUENCY_FIELDS or (key == "chi" and not chi_literal):
            converted[key] = caption_to_angular(value)
        else:
            converted[key] = value
    return converted


def _chi_reading(config: ConfigFile, override: bool | None) -> bool:
    if override is not None:
        if config.chi_literal is not None and config.chi_literal != override:
            logger.info(f"chi_literal={override} from the command line replaces the file value")
        return override
    if config.chi_literal is not None:
        return config.chi_literal
    return settings.chi_literal


def _grid(raw: dict[str, Any] | None, params: SystemParams, angular: bool) -> GridSpec:
    if raw is None:
        return GridSpec(
            center=params.omega_mech,
            span=0.02 * params.omega_mech,
            npoints=settings.sweep_points,
        )
    data = dict(raw)
    if not angular:
        for key in ("center", "span"):
            if key in data:
                data[key] = caption_to_angular(data[key])
    return GridSpec.model_validate(data)


def load_config_file(path: str | Path, chi_literal: bool | None = None) -> Preset:
    """
    Read a TOML configuration file into a Preset named after the file stem.

    Args:
        path: File location
        chi_literal: Overrides the file's chi_literal key; both unset fall back to
            settings.chi_literal. Only matters for files written in Hz.

    Returns:
        Preset with internal (angular) units

    Raises:
        ConfigurationError: Missing file, TOML syntax error or schema violation
    """
    file_path = Path(path)
    try:
        with file_path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigurationError(
            f"Configuration file not found: {file_path}", details={"path": str(file_path)}
        ) from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(
            f"Malformed configuration file {file_path}: {e}", details={"path": str(file_path)}
        ) from e

    try:
        config = ConfigFile.model_validate(raw)
        literal = _chi_reading(config, chi_literal)
        system = _to_internal(config.system, config.angular, literal)
        drive = _to_internal(config.drive, config.angular, literal)
        params = SystemParams.model_validate(system)
        drive_config = DriveConfig.model_validate(drive)
        variants = tuple(
            PresetVariant(
                label=label,
                overrides=_to_internal(overrides, config.angular, literal),
            )
            for label, overrides in config.variants.items()
        )
        unknown = {
            key
            for variant in variants
            for key in variant.overrides
            if key not in SystemParams.model_fields and key not in DriveConfig.model_fields
        }
        if unknown:
            raise ConfigurationError(
                f"Unknown variant fields in {file_path}: {', '.join(sorted(unknown))}",
                details={"path": str(file_path), "fields": sorted(unknown)},
            )
        preset = Preset(
            name=file_path.stem,
            summary=config.summary or f"Configuration file {file_path.name}",
            params=params,
            drive=drive_config,
            variants=variants,
            grid=_grid(config.grid, params, config.angular),
            tau_grid=TauGridSpec.model_validate(
                config.tau_grid or {"tau_max": 100.0 / params.gamma_cavity, "npoints": 200}
            ),
            chi_literal=literal,
        )
    except PydanticValidationError as e:
        raise ConfigurationError(
            f"Invalid configuration file {file_path}: {e}",
            details={"path": str(file_path), "errors": e.errors(include_url=False)},
        ) from e

    logger.info(f"Loaded configuration '{preset.name}' with {len(variants)} variants")
    return preset
