"""Named parameter presets fig2..fig6 and their labelled curve variants."""

from pydantic import BaseModel, ConfigDict, Field

from src.lib.config import settings
from src.lib.exceptions import PresetNotFoundError
from src.models.params import (
    DriveConfig,
    GridSpec,
    SystemParams,
    TauGridSpec,
    caption_to_angular,
)


class PresetVariant(BaseModel):
    """
    One labelled curve of a figure.

    Attributes:
        label: Variant identifier ("i", "ii", "iii", "g21.7", ...)
        description: Caption text of the curve
        overrides: SystemParams / DriveConfig fields replaced for this curve (internal units)
        aliases: Alternative labels accepted by lookups
    """

    model_config = ConfigDict(frozen=True)

    label: str
    description: str = ""
    overrides: dict[str, float] = Field(default_factory=dict)
    aliases: tuple[str, ...] = ()


class Preset(BaseModel):
    """
    A fully populated figure preset.

    Attributes:
        name: Preset identifier
        summary: One-line description
        params: Base system parameters
        drive: Base drive configuration
        variants: Curve variants in caption order
        grid: Default probe-detuning grid
        tau_grid: Default delay grid for g2
        chi_literal: Whether chi was read without the 2*pi factor
    """

    model_config = ConfigDict(frozen=True)

    name: str
    summary: str
    params: SystemParams
    drive: DriveConfig
    variants: tuple[PresetVariant, ...] = ()
    grid: GridSpec
    tau_grid: TauGridSpec
    chi_literal: bool = False

    @property
    def variant_labels(self) -> list[str]:
        """Labels in caption order."""
        return [v.label for v in self.variants] or ["base"]

    def get_variant(self, label: str) -> PresetVariant:
        """
        Look up a variant by label or alias.

        Raises:
            PresetNotFoundError: If the label is unknown
        """
        if not self.variants and label == "base":
            return PresetVariant(label="base")
        for variant in self.variants:
            if label == variant.label or label in variant.aliases:
                return variant
        raise PresetNotFoundError(
            f"Unknown variant '{label}' for preset '{self.name}'. "
            f"Valid variants: {', '.join(self.variant_labels)}",
            details={"preset": self.name, "valid": self.variant_labels},
        )

    def resolve(self, label: str | None = None) -> tuple[SystemParams, DriveConfig]:
        """
        Apply a variant's overrides to the base parameters.

        Args:
            label: Variant label; None selects the last variant in caption order

        Returns:
            (params, drive) for the variant
        """
        if label is None:
            label = self.variant_labels[-1]
        variant = self.get_variant(label)

        system_updates = {
            k: v for k, v in variant.overrides.items() if k in SystemParams.model_fields
        }
        drive_updates = {
            k: v for k, v in variant.overrides.items() if k in DriveConfig.model_fields
        }
        params = SystemParams.model_validate({**self.params.model_dump(), **system_updates})
        drive = DriveConfig.model_validate({**self.drive.model_dump(), **drive_updates})
        return params, drive


def _mhz(value: float) -> float:
    return caption_to_angular(value * 1e6)


def _ghz(value: float) -> float:
    return caption_to_angular(value * 1e9)


def _chi(caption_value: float, chi_literal: bool) -> float:
    # Caption quotes chi/2pi in J/m; the literal reading skips the 2*pi factor
    return caption_value if chi_literal else caption_to_angular(caption_value)


def _mechanics() -> dict[str, float]:
    return {"omega_mech": _mhz(8.5), "gamma_mech": caption_to_angular(25.0), "mass": 2e-15}


def _fig2_base(big_omega_mhz: float = 3.1) -> tuple[SystemParams, DriveConfig]:
    params = SystemParams(
        omega_cavity=_ghz(5.0),
        gamma_cavity=_mhz(0.5),
        omega_qubit=_ghz(4.0),
        gamma_qubit=_mhz(1.0),
        **_mechanics(),
    )
    omega_drive = _ghz(4.99)
    drive = DriveConfig(
        omega_drive=omega_drive,
        omega_probe=omega_drive + params.omega_mech,
        big_omega=_mhz(big_omega_mhz),
        epsilon=1e-3 * _mhz(big_omega_mhz),
        temperature=0.0,
    )
    return params, drive


def _three_variants(g_mhz: float, chi_caption: float, chi_literal: bool) -> tuple[PresetVariant, ...]:
    chi = _chi(chi_caption, chi_literal)
    return (
        PresetVariant(
            label="i",
            description=f"g=0 and chi/2pi={chi_caption:g} J/m",
            overrides={"g_qubit": 0.0, "chi": chi},
        ),
        PresetVariant(
            label="ii",
            description=f"g/2pi={g_mhz:g} MHz and chi=0",
            overrides={"g_qubit": _mhz(g_mhz), "chi": 0.0},
        ),
        PresetVariant(
            label="iii",
            description=f"g/2pi={g_mhz:g} MHz and chi/2pi={chi_caption:g} J/m",
            overrides={"g_qubit": _mhz(g_mhz), "chi": chi},
        ),
    )


def _fig3_variants(chi_literal: bool) -> tuple[PresetVariant, ...]:
    # Caption order differs from fig2: the qubit-only curve comes first
    chi = _chi(3.0e-13, chi_literal)
    return (
        PresetVariant(
            label="i",
            description="g/2pi=30 MHz and chi=0",
            overrides={"g_qubit": _mhz(30.0), "chi": 0.0},
        ),
        PresetVariant(
            label="ii",
            description="g=0 and chi/2pi=3e-13 J/m",
            overrides={"g_qubit": 0.0, "chi": chi},
        ),
        PresetVariant(
            label="iii",
            description="g/2pi=30 MHz and chi/2pi=3e-13 J/m",
            overrides={"g_qubit": _mhz(30.0), "chi": chi},
        ),
    )


def _tau_window(params: SystemParams) -> TauGridSpec:
    # Delays out to 100 cavity lifetimes
    return TauGridSpec(tau_max=100.0 / params.gamma_cavity, npoints=200)


def _normalized_window(params: SystemParams, npoints: int) -> GridSpec:
    # (delta - omega_m)/omega_m in [-0.01, 0.01]
    return GridSpec(center=params.omega_mech, span=0.02 * params.omega_mech, npoints=npoints)


def _fig2(chi_literal: bool, npoints: int) -> Preset:
    params, drive = _fig2_base()
    return Preset(
        name="fig2",
        summary="Probe transparency and gain: mechanics only, qubit only, both (Omega/2pi=3.1 MHz)",
        params=params,
        drive=drive,
        variants=_three_variants(41.7, 2.8e-14, chi_literal),
        grid=_normalized_window(params, npoints),
        tau_grid=_tau_window(params),
        chi_literal=chi_literal,
    )


def _fig3(chi_literal: bool, npoints: int) -> Preset:
    params = SystemParams(
        omega_cavity=_ghz(5.0),
        gamma_cavity=_mhz(5.0),
        omega_qubit=_ghz(4.9),
        gamma_qubit=_mhz(2.0),
        **_mechanics(),
    )
    omega_drive = _ghz(4.965)
    drive = DriveConfig(
        omega_drive=omega_drive,
        omega_probe=omega_drive + params.omega_mech,
        big_omega=_mhz(0.98),
        epsilon=1e-3 * _mhz(0.98),
        temperature=0.0,
    )
    return Preset(
        name="fig3",
        summary="Probe response over delta/2pi in [20, 50] MHz for a broad cavity (Omega/2pi=0.98 MHz)",
        params=params,
        drive=drive,
        variants=_fig3_variants(chi_literal),
        grid=GridSpec(center=_mhz(35.0), span=_mhz(30.0), npoints=npoints),
        tau_grid=_tau_window(params),
        chi_literal=chi_literal,
    )


def _fig4a(chi_literal: bool, npoints: int) -> Preset:
    params, drive = _fig2_base()
    chi = _chi(2.8e-14, chi_literal)
    variants = tuple(
        PresetVariant(
            label=f"g{g:g}",
            description=f"g/2pi={g:g} MHz, chi/2pi=2.8e-14 J/m",
            overrides={"g_qubit": _mhz(g), "chi": chi},
            aliases=(alias,),
        )
        for g, alias in ((21.7, "i"), (31.7, "ii"), (41.7, "iii"))
    )
    return Preset(
        name="fig4a",
        summary="Gain versus qubit coupling g/2pi in {21.7, 31.7, 41.7} MHz",
        params=params,
        drive=drive,
        variants=variants,
        grid=_normalized_window(params, npoints),
        tau_grid=_tau_window(params),
        chi_literal=chi_literal,
    )


def _fig4b(chi_literal: bool, npoints: int) -> Preset:
    params, drive = _fig2_base()
    variants = tuple(
        PresetVariant(
            label=f"chi{c:.1f}",
            description=f"g/2pi=41.7 MHz, chi/2pi={c:g}e-14 J/m",
            overrides={"g_qubit": _mhz(41.7), "chi": _chi(c * 1e-14, chi_literal)},
            aliases=(alias,),
        )
        for c, alias in ((2.0, "i"), (2.4, "ii"), (2.8, "iii"))
    )
    return Preset(
        name="fig4b",
        summary="Gain versus optomechanical coupling chi/2pi in {2.0, 2.4, 2.8}e-14 J/m",
        params=params,
        drive=drive,
        variants=variants,
        grid=_normalized_window(params, npoints),
        tau_grid=_tau_window(params),
        chi_literal=chi_literal,
    )


def _statistics_preset(
    name: str, summary: str, big_omega_mhz: float, chi_literal: bool, npoints: int
) -> Preset:
    params, drive = _fig2_base(big_omega_mhz)
    # Statistics run with the probe switched off
    drive = drive.model_copy(update={"epsilon": 0.0, "omega_probe": drive.omega_drive})
    return Preset(
        name=name,
        summary=summary,
        params=params,
        drive=drive,
        variants=_three_variants(41.7, 2.8e-14, chi_literal),
        grid=_normalized_window(params, npoints),
        tau_grid=_tau_window(params),
        chi_literal=chi_literal,
    )


def _fig5(chi_literal: bool, npoints: int) -> Preset:
    return _statistics_preset(
        "fig5", "Output g2(tau) at T=0 with Omega/2pi=3.1 MHz", 3.1, chi_literal, npoints
    )


def _fig6(chi_literal: bool, npoints: int) -> Preset:
    return _statistics_preset(
        "fig6", "Output g2(tau) at T=0 with weak drive Omega/2pi=0.22 MHz", 0.22, chi_literal, npoints
    )


_BUILDERS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig5": _fig5,
    "fig6": _fig6,
}

PRESET_NAMES: tuple[str, ...] = tuple(_BUILDERS)


def load_preset(name: str, chi_literal: bool | None = None, npoints: int | None = None) -> Preset:
    """
    Build a named preset.

    Args:
        name: One of PRESET_NAMES
        chi_literal: Read chi without the 2*pi factor (default: settings.chi_literal)
        npoints: Points of the default probe grid (default: settings.sweep_points)

    Returns:
        Immutable preset

    Raises:
        PresetNotFoundError: If the name is unknown
    """
    builder = _BUILDERS.get(name)
    if builder is None:
        raise PresetNotFoundError(
            f"Unknown preset '{name}'. Valid presets: {', '.join(PRESET_NAMES)}",
            details={"valid": list(PRESET_NAMES)},
        )
    literal = settings.chi_literal if chi_literal is None else chi_literal
    return builder(literal, npoints or settings.sweep_points)


def list_presets() -> list[tuple[str, str]]:
    """(name, summary) for every preset."""
    return [(name, load_preset(name).summary) for name in PRESET_NAMES]
