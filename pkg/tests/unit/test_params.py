"""Unit tests for parameter models, unit conversion and grids."""

import math

import pytest
from pydantic import ValidationError as PydanticValidationError

from src.models.params import (
    CONSTANTS,
    DriveConfig,
    GridSpec,
    NoiseModel,
    SystemParams,
    TauGridSpec,
    angular_to_caption,
    caption_to_angular,
)


@pytest.mark.unit
class TestUnits:
    """Caption values are quoted as X/2pi."""

    def test_caption_to_angular(self) -> None:
        assert caption_to_angular(8.5e6) == pytest.approx(2 * math.pi * 8.5e6, rel=1e-15)

    @pytest.mark.parametrize("value", [0.0, 25.0, 8.5e6, 4.99e9, 2.8e-14])
    def test_round_trip(self, value: float) -> None:
        assert angular_to_caption(caption_to_angular(value)) == pytest.approx(value, rel=1e-15)

    def test_constants_are_codata(self) -> None:
        assert CONSTANTS.hbar == pytest.approx(1.054571817e-34, rel=1e-9)
        assert CONSTANTS.k_boltzmann == pytest.approx(1.380649e-23, rel=1e-9)


@pytest.mark.unit
class TestSystemParams:
    """SystemParams validation."""

    def test_rejects_nan(self) -> None:
        with pytest.raises(PydanticValidationError):
            SystemParams(
                omega_cavity=float("nan"),
                omega_qubit=1.0,
                omega_mech=1.0,
                gamma_cavity=1.0,
                gamma_qubit=1.0,
                gamma_mech=1.0,
                mass=1.0,
            )

    def test_is_frozen(self, bare_params: SystemParams) -> None:
        with pytest.raises(PydanticValidationError):
            bare_params.chi = 1.0  # type: ignore[misc]

    def test_schema_example_validates(self) -> None:
        example = SystemParams.model_config["json_schema_extra"]["example"]  # type: ignore[index]
        params = SystemParams.model_validate(example)
        assert params.sigma_z_ss == 1.0


@pytest.mark.unit
class TestGridSpec:
    """Probe-detuning grids."""

    def test_single_point_sits_at_center(self) -> None:
        assert GridSpec(center=3.0, span=10.0, npoints=1).values() == [3.0]

    def test_endpoints_and_order(self) -> None:
        values = GridSpec(center=10.0, span=4.0, npoints=5).values()
        assert values[0] == pytest.approx(8.0)
        assert values[-1] == pytest.approx(12.0)
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_negative_span(self) -> None:
        with pytest.raises(PydanticValidationError):
            GridSpec(center=0.0, span=-1.0, npoints=3)


@pytest.mark.unit
class TestTauGridSpec:
    """Delay grids for g2."""

    def test_linear_grid_starts_at_zero(self) -> None:
        values = TauGridSpec(tau_max=2e-6, npoints=201).values()
        assert values[0] == 0.0
        assert values[-1] == pytest.approx(2e-6)
        assert len(values) == 201

    def test_log_grid_spans_four_decades(self) -> None:
        values = TauGridSpec(tau_max=1e-5, npoints=9, log=True).values()
        assert values[0] == pytest.approx(1e-9)
        assert values[-1] == pytest.approx(1e-5)

    def test_rejects_nonpositive_tau_max(self) -> None:
        with pytest.raises(PydanticValidationError):
            TauGridSpec(tau_max=0.0, npoints=3)


@pytest.mark.unit
def test_noise_model_from_params(bare_params: SystemParams, bare_drive: DriveConfig) -> None:
    noise = NoiseModel.from_params(bare_params, bare_drive.model_copy(update={"temperature": 0.025}))
    assert noise.temperature == 0.025
    assert noise.gamma_mech == bare_params.gamma_mech
    assert noise.mass == bare_params.mass
