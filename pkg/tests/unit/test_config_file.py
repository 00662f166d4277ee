"""Unit tests for TOML configuration files."""

import math
from pathlib import Path

import pytest

from src.lib.exceptions import ConfigurationError
from src.models.config_file import load_config_file

TWO_PI = 2.0 * math.pi

HZ_CONFIG = """
angular = false
summary = "bare cavity in Hz"

[system]
omega_cavity = 5.0e9
omega_qubit = 4.0e9
omega_mech = 8.5e6
gamma_cavity = 0.5e6
gamma_qubit = 1.0e6
gamma_mech = 25.0
mass = 2e-15
chi = 2.8e-14

[drive]
omega_drive = 4.99e9
big_omega = 1.0e6

[variants.coupled]
g_qubit = 41.7e6
"""


def _write(tmp_path: Path, text: str, name: str = "cavity.toml") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.unit
class TestLoadConfigFile:
    """Reading configuration files into presets."""

    def test_hz_values_are_converted(self, tmp_path: Path) -> None:
        preset = load_config_file(_write(tmp_path, HZ_CONFIG))
        assert preset.name == "cavity"
        assert preset.summary == "bare cavity in Hz"
        assert preset.params.omega_cavity == pytest.approx(TWO_PI * 5.0e9)
        # chi keeps its caption value by default
        assert preset.params.chi == pytest.approx(2.8e-14)
        # Mass is not a frequency
        assert preset.params.mass == 2e-15

    def test_variant_overrides(self, tmp_path: Path) -> None:
        preset = load_config_file(_write(tmp_path, HZ_CONFIG))
        assert preset.variant_labels == ["coupled"]
        params, _ = preset.resolve("coupled")
        assert params.g_qubit == pytest.approx(TWO_PI * 41.7e6)

    def test_chi_angular_reading(self, tmp_path: Path) -> None:
        text = HZ_CONFIG.replace("angular = false", "angular = false\nchi_literal = false")
        preset = load_config_file(_write(tmp_path, text))
        assert preset.params.chi == pytest.approx(TWO_PI * 2.8e-14)
        assert not preset.chi_literal

    def test_chi_override_replaces_file_value(self, tmp_path: Path) -> None:
        text = HZ_CONFIG.replace("angular = false", "angular = false\nchi_literal = false")
        preset = load_config_file(_write(tmp_path, text), chi_literal=True)
        assert preset.params.chi == pytest.approx(2.8e-14)
        assert preset.chi_literal
        params, _ = preset.resolve("coupled")
        assert params.chi == pytest.approx(2.8e-14)

    def test_chi_override_without_file_key(self, tmp_path: Path) -> None:
        preset = load_config_file(_write(tmp_path, HZ_CONFIG), chi_literal=False)
        assert preset.params.chi == pytest.approx(TWO_PI * 2.8e-14)

    def test_angular_values_kept(self, tmp_path: Path) -> None:
        text = HZ_CONFIG.replace("angular = false", "angular = true")
        preset = load_config_file(_write(tmp_path, text))
        assert preset.params.omega_cavity == 5.0e9

    def test_default_grid(self, tmp_path: Path) -> None:
        preset = load_config_file(_write(tmp_path, HZ_CONFIG))
        assert preset.grid.center == pytest.approx(preset.params.omega_mech)
        # 100 cavity lifetimes
        assert preset.tau_grid.tau_max == pytest.approx(100.0 / (TWO_PI * 0.5e6))

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigurationError, match="not found"):
            load_config_file(tmp_path / "absent.toml")

    def test_malformed_toml(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigurationError, match="Malformed"):
            load_config_file(_write(tmp_path, "[system\nomega = 1"))

    def test_unknown_top_level_key(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigurationError):
            load_config_file(_write(tmp_path, "extra_key = 1\n" + HZ_CONFIG))

    def test_missing_system_field(self, tmp_path: Path) -> None:
        text = HZ_CONFIG.replace("mass = 2e-15\n", "")
        with pytest.raises(ConfigurationError):
            load_config_file(_write(tmp_path, text))

    def test_unknown_variant_field(self, tmp_path: Path) -> None:
        text = HZ_CONFIG + "\n[variants.bad]\nwarp_factor = 9.0\n"
        with pytest.raises(ConfigurationError, match="warp_factor"):
            load_config_file(_write(tmp_path, text))
