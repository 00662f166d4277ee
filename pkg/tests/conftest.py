"""Shared fixtures: figure presets and bare-cavity parameter sets."""

import math

import pytest

from src.models.params import DriveConfig, SystemParams
from src.models.presets import Preset, load_preset

TWO_PI = 2.0 * math.pi


@pytest.fixture
def bare_params() -> SystemParams:
    """Cavity with the qubit and mechanics uncoupled (chi = g = 0)."""
    return SystemParams(
        omega_cavity=TWO_PI * 5.0e9,
        omega_qubit=TWO_PI * 4.0e9,
        omega_mech=TWO_PI * 8.5e6,
        gamma_cavity=TWO_PI * 0.5e6,
        gamma_qubit=TWO_PI * 1.0e6,
        gamma_mech=TWO_PI * 25.0,
        mass=2e-15,
        chi=0.0,
        g_qubit=0.0,
    )


@pytest.fixture
def bare_drive(bare_params: SystemParams) -> DriveConfig:
    """Drive 2 MHz below the cavity, probe 1 MHz above the drive."""
    omega_drive = bare_params.omega_cavity - TWO_PI * 2.0e6
    return DriveConfig(
        omega_drive=omega_drive,
        omega_probe=omega_drive + TWO_PI * 1.0e6,
        big_omega=TWO_PI * 1.0e6,
        epsilon=TWO_PI * 1.0e3,
    )


@pytest.fixture
def fig2() -> Preset:
    return load_preset("fig2", npoints=201)


@pytest.fixture
def fig3() -> Preset:
    return load_preset("fig3", npoints=201)


@pytest.fixture
def fig5() -> Preset:
    return load_preset("fig5", npoints=201)
