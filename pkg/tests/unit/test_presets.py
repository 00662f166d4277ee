"""Unit tests for the figure presets."""

import math

import pytest

from src.lib.exceptions import PresetNotFoundError
from src.models.presets import PRESET_NAMES, list_presets, load_preset

TWO_PI = 2.0 * math.pi


@pytest.mark.unit
class TestPresetCatalog:
    """Names and summaries."""

    def test_names(self) -> None:
        assert PRESET_NAMES == ("fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6")

    def test_list_presets_has_summaries(self) -> None:
        listing = list_presets()
        assert [name for name, _ in listing] == list(PRESET_NAMES)
        assert all(summary for _, summary in listing)

    def test_unknown_preset(self) -> None:
        with pytest.raises(PresetNotFoundError) as exc_info:
            load_preset("fig9")
        assert exc_info.value.details["valid"] == list(PRESET_NAMES)

    def test_npoints_sets_default_grid(self) -> None:
        assert load_preset("fig2", npoints=11).grid.npoints == 11


@pytest.mark.unit
class TestFig2:
    """Mechanics only, qubit only, both."""

    def test_caption_values(self) -> None:
        params, drive = load_preset("fig2").resolve("iii")
        assert params.omega_mech == pytest.approx(TWO_PI * 8.5e6)
        assert params.gamma_mech == pytest.approx(TWO_PI * 25.0)
        assert params.mass == 2e-15
        assert params.g_qubit == pytest.approx(TWO_PI * 41.7e6)
        # chi is read as printed in the caption
        assert params.chi == pytest.approx(2.8e-14)
        assert drive.big_omega == pytest.approx(TWO_PI * 3.1e6)

    def test_variants(self) -> None:
        preset = load_preset("fig2")
        assert preset.variant_labels == ["i", "ii", "iii"]
        p_i, _ = preset.resolve("i")
        p_ii, _ = preset.resolve("ii")
        assert p_i.g_qubit == 0.0 and p_i.chi > 0
        assert p_ii.chi == 0.0 and p_ii.g_qubit > 0

    def test_default_variant_is_last(self) -> None:
        preset = load_preset("fig2")
        assert preset.resolve() == preset.resolve("iii")

    def test_probe_window_centered_on_mechanics(self) -> None:
        preset = load_preset("fig2")
        assert preset.grid.center == pytest.approx(preset.params.omega_mech)
        assert preset.grid.span == pytest.approx(0.02 * preset.params.omega_mech)

    def test_chi_angular_reading(self) -> None:
        preset = load_preset("fig2", chi_literal=False)
        params, _ = preset.resolve("iii")
        assert params.chi == pytest.approx(TWO_PI * 2.8e-14)
        assert not preset.chi_literal

    def test_default_reading_is_literal(self) -> None:
        assert load_preset("fig2").chi_literal

    def test_unknown_variant(self) -> None:
        with pytest.raises(PresetNotFoundError) as exc_info:
            load_preset("fig2").resolve("iv")
        assert exc_info.value.details["valid"] == ["i", "ii", "iii"]


@pytest.mark.unit
class TestFig4:
    """Coupling families with descriptive labels and roman aliases."""

    def test_fig4a_labels_and_aliases(self) -> None:
        preset = load_preset("fig4a")
        assert preset.variant_labels == ["g21.7", "g31.7", "g41.7"]
        assert preset.resolve("i") == preset.resolve("g21.7")
        params, _ = preset.resolve("iii")
        assert params.g_qubit == pytest.approx(TWO_PI * 41.7e6)

    def test_fig4b_labels(self) -> None:
        preset = load_preset("fig4b")
        assert preset.variant_labels == ["chi2.0", "chi2.4", "chi2.8"]
        params, _ = preset.resolve("ii")
        assert params.chi == pytest.approx(2.4e-14)


@pytest.mark.unit
class TestFig3:
    """Qubit only, mechanics only, both: the reverse of the fig2 order."""

    def test_variant_i_is_qubit_only(self) -> None:
        params, _ = load_preset("fig3").resolve("i")
        assert params.g_qubit == pytest.approx(TWO_PI * 30.0e6)
        assert params.chi == 0.0

    def test_variant_ii_is_mechanics_only(self) -> None:
        params, _ = load_preset("fig3").resolve("ii")
        assert params.g_qubit == 0.0
        assert params.chi == pytest.approx(3.0e-13)

    def test_variant_iii_couples_both(self) -> None:
        params, drive = load_preset("fig3").resolve("iii")
        assert params.g_qubit == pytest.approx(TWO_PI * 30.0e6)
        assert params.chi == pytest.approx(3.0e-13)
        assert params.gamma_cavity == pytest.approx(TWO_PI * 5.0e6)
        assert drive.big_omega == pytest.approx(TWO_PI * 0.98e6)

    def test_grid_spans_20_to_50_mhz(self) -> None:
        grid = load_preset("fig3", npoints=31).grid
        values = grid.values()
        assert values[0] == pytest.approx(TWO_PI * 20.0e6)
        assert values[-1] == pytest.approx(TWO_PI * 50.0e6)


@pytest.mark.unit
class TestStatisticsPresets:
    """fig5 and fig6 switch the probe off."""

    @pytest.mark.parametrize("name,omega_mhz", [("fig5", 3.1), ("fig6", 0.22)])
    def test_probe_off(self, name: str, omega_mhz: float) -> None:
        _, drive = load_preset(name).resolve("iii")
        assert drive.epsilon == 0.0
        assert drive.big_omega == pytest.approx(TWO_PI * omega_mhz * 1e6)
        assert drive.temperature == 0.0


@pytest.mark.unit
@pytest.mark.parametrize("name", PRESET_NAMES)
def test_delay_window_covers_100_cavity_lifetimes(name: str) -> None:
    preset = load_preset(name)
    assert preset.tau_grid.tau_max == pytest.approx(100.0 / preset.params.gamma_cavity)
