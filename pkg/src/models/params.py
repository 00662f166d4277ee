"""Pydantic models for physical constants, system parameters, drive settings and detunings."""

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants as sc


class PhysicalConstants(BaseModel):
    """
    Fundamental constants used by every formula.

    Attributes:
        hbar: Reduced Planck constant (J*s)
        k_boltzmann: Boltzmann constant (J/K)
    """

    model_config = ConfigDict(frozen=True)

    hbar: float = Field(default=sc.hbar, gt=0)
    k_boltzmann: float = Field(default=sc.k, gt=0)


# CODATA values; not user-configurable
CONSTANTS = PhysicalConstants()


class SystemParams(BaseModel):
    """
    Physical constants of the cavity, qubit and mechanical resonator.

    Every frequency, damping rate and coupling rate is an angular quantity (rad/s).
    Positivity is reported by validate_params rather than enforced here so that
    broken parameter sets can still be inspected.

    Attributes:
        omega_cavity: Cavity frequency
        omega_qubit: Qubit transition frequency
        omega_mech: Mechanical frequency
        gamma_cavity: Cavity damping rate
        gamma_qubit: Qubit decoherence rate
        gamma_mech: Mechanical damping rate
        mass: Resonator mass (kg)
        chi: Radiation-pressure coupling (N, i.e. J/m)
        g_qubit: Qubit-cavity coupling rate
        sigma_z_ss: Frozen qubit inversion
    """

    model_config = ConfigDict(
        frozen=True,
        allow_inf_nan=False,
        json_schema_extra={
            "example": {
                "omega_cavity": 31415926535.897934,
                "omega_qubit": 25132741228.718345,
                "omega_mech": 53407075.11102643,
                "gamma_cavity": 3141592.653589793,
                "gamma_qubit": 6283185.307179586,
                "gamma_mech": 157.07963267948966,
                "mass": 2e-15,
                "chi": 1.7592918860102842e-13,
                "g_qubit": 262008826.30338737,
                "sigma_z_ss": 1.0,
            }
        },
    )

    omega_cavity: float
    omega_qubit: float
    omega_mech: float
    gamma_cavity: float
    gamma_qubit: float
    gamma_mech: float
    mass: float
    chi: float = 0.0
    g_qubit: float = 0.0
    sigma_z_ss: float = 1.0


class DriveConfig(BaseModel):
    """
    Drive and probe fields plus the mechanical bath temperature.

    Attributes:
        omega_drive: Drive frequency (rad/s)
        omega_probe: Probe frequency (rad/s)
        big_omega: Drive amplitude (rad/s), real and nonnegative
        epsilon: Probe amplitude (rad/s), real and nonnegative
        temperature: Bath temperature (K)
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    omega_drive: float
    omega_probe: float = 0.0
    big_omega: float = 0.0
    epsilon: float = 0.0
    temperature: float = 0.0


class Detunings(BaseModel):
    """Detunings from the drive: cavity (delta1), qubit (delta2) and probe (delta)."""

    model_config = ConfigDict(frozen=True)

    delta1: float
    delta2: float
    delta: float


class Severity(str, Enum):
    """Diagnostic severity."""

    ERROR = "error"
    WARNING = "warning"


class Diagnostic(BaseModel):
    """A violated invariant (error) or a soft warning about a parameter set."""

    model_config = ConfigDict(frozen=True)

    severity: Severity
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.field}: {self.message}"


TWO_PI = 2.0 * math.pi


def caption_to_angular(value_hz: float) -> float:
    """Convert a caption value quoted as X/2pi = v into the internal angular value 2*pi*v."""
    return TWO_PI * value_hz


def angular_to_caption(value_rad_s: float) -> float:
    """Inverse of caption_to_angular."""
    return value_rad_s / TWO_PI


class GridSpec(BaseModel):
    """
    Probe-detuning grid: npoints values spread evenly over center +/- span/2.

    A single point sits at the center.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    center: float
    span: float = Field(ge=0)
    npoints: int = Field(ge=1)

    def values(self) -> list[float]:
        """Strictly increasing grid values (rad/s)."""
        if self.npoints == 1:
            return [self.center]
        start = self.center - 0.5 * self.span
        step = self.span / (self.npoints - 1)
        return [start + k * step for k in range(self.npoints)]


class TauGridSpec(BaseModel):
    """Delay grid for g2: npoints values up to tau_max, linear from 0 or logarithmic."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    tau_max: float = Field(gt=0)
    npoints: int = Field(ge=1)
    log: bool = False

    def values(self) -> list[float]:
        """Grid values in seconds, ascending."""
        if self.npoints == 1:
            return [self.tau_max]
        if self.log:
            # Four decades below tau_max
            lo = math.log10(self.tau_max) - 4.0
            hi = math.log10(self.tau_max)
            return [10 ** (lo + (hi - lo) * k / (self.npoints - 1)) for k in range(self.npoints)]
        step = self.tau_max / (self.npoints - 1)
        return [k * step for k in range(self.npoints)]


class NoiseModel(BaseModel):
    """Thermal bath of the mechanical resonator."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    temperature: float = Field(default=0.0, ge=0)
    gamma_mech: float = Field(gt=0)
    mass: float = Field(gt=0)

    @classmethod
    def from_params(cls, params: SystemParams, drive: DriveConfig) -> "NoiseModel":
        return cls(temperature=drive.temperature, gamma_mech=params.gamma_mech, mass=params.mass)
