"""Unit tests for the pole expansion of the transfer functions and its delay transforms."""

from collections.abc import Callable

import numpy as np
import pytest
from pytest_mock import MockerFixture
from scipy.integrate import quad

from src.lib.exceptions import QuadratureError, SingularSystemError
from src.models.params import CONSTANTS, NoiseModel
from src.models.presets import Preset
from src.services import pole_expansion
from src.services.fluctuation_service import output_coeffs, thermal_spectrum
from src.services.parameter_service import derive_detunings
from src.services.pole_expansion import (
    PartialFraction,
    kernel_fractions,
    transfer_fractions,
    y12_y13,
    y14_value,
)
from src.services.steady_state_service import solve_steady_state

GAMMA = 2.0

# hbar*gamma_m*m = 1 keeps the noise prefactor out of the comparisons
UNIT_BATH = NoiseModel(temperature=0.0, gamma_mech=1.0, mass=1.0 / CONSTANTS.hbar)

# beta = hbar/(2 k_B T) = 1 s puts the Matsubara frequencies next to the poles
UNIT_BETA_TEMPERATURE = CONSTANTS.hbar / (2.0 * CONSTANTS.k_boltzmann)


def _pf(residues: list[complex], poles: list[complex], constant: complex = 0j) -> PartialFraction:
    return PartialFraction(np.array(residues, dtype=complex), np.array(poles, dtype=complex), constant)


def _double_pole_kernel() -> PartialFraction:
    """|h|^2 with h = 1/((w - p1)(w - p2)), decaying like 1/w^4."""
    h = _pf([1.0], [2.0 - 1.0j]) * _pf([1.0], [-1.0 - 0.5j])
    return h.conjugated() * h


def _half_line(f: Callable[[float], float], tau: float) -> complex:
    """(1/2pi) * integral over w > 0 of f(w) e^{-i w tau} for real f."""
    if tau == 0:
        return complex(quad(f, 0.0, np.inf, limit=500)[0] / (2.0 * np.pi))
    cos_part = quad(f, 0.0, np.inf, weight="cos", wvar=tau, limlst=200)[0]
    sin_part = quad(f, 0.0, np.inf, weight="sin", wvar=tau, limlst=200)[0]
    return complex(cos_part, -sin_part) / (2.0 * np.pi)


@pytest.mark.unit
class TestPartialFraction:
    left = _pf([1.0 + 2.0j, -0.5j], [1.0 - 1.0j, -2.0 - 0.5j])
    right = _pf([0.3 + 0j], [0.5 - 2.0j], constant=0.7 + 0j)
    omega = np.linspace(-5.0, 5.0, 21)

    def test_product_is_pointwise(self) -> None:
        product = self.left * self.right
        assert product(self.omega) == pytest.approx(self.left(self.omega) * self.right(self.omega), rel=1e-12)

    def test_reflection(self) -> None:
        assert self.left.reflected()(self.omega) == pytest.approx(self.left(-self.omega), rel=1e-14)

    def test_conjugation_on_real_axis(self) -> None:
        assert self.right.conjugated()(self.omega) == pytest.approx(np.conj(self.right(self.omega)), rel=1e-14)

    def test_sum(self) -> None:
        total = self.left + self.right
        assert total(self.omega) == pytest.approx(self.left(self.omega) + self.right(self.omega), rel=1e-14)


@pytest.mark.unit
class TestTransferFractions:
    @pytest.mark.parametrize("ratio", [-1.5, -0.3, 0.0, 0.98, 1.02, 2.5])
    def test_matches_output_coefficients(self, fig2: Preset, ratio: float) -> None:
        params, drive = fig2.resolve("iii")
        steady = solve_steady_state(params, drive)
        fractions, condition = transfer_fractions(steady, params, derive_detunings(params, drive))
        omega = ratio * params.omega_mech
        direct = output_coeffs(steady, params, drive, omega)
        assert condition < 1e10
        for fraction, expected in zip(fractions, (direct.b1, direct.b2, direct.b3, direct.b4, direct.b5)):
            scale = max(abs(expected[0]), abs(direct.b1[0]))
            assert abs(fraction(omega)[0] - expected[0]) <= 1e-8 * scale

    def test_defective_matrix_rejected(self, fig2: Preset, mocker: MockerFixture) -> None:
        params, drive = fig2.resolve("iii")
        steady = solve_steady_state(params, drive)
        mocker.patch.object(pole_expansion.settings, "pole_cond_limit", 1.0)
        with pytest.raises(SingularSystemError, match="ill-conditioned"):
            transfer_fractions(steady, params, derive_detunings(params, drive))


@pytest.mark.unit
class TestDelayTransforms:
    def test_lorentzian(self) -> None:
        # 1/(w^2 + gamma^2) transforms to e^{-gamma tau}/(2 gamma)
        kernel = _pf([1.0 / (2j * GAMMA), -1.0 / (2j * GAMMA)], [1j * GAMMA, -1j * GAMMA])
        for tau in (0.0, 0.4, 3.0):
            value, _ = pole_expansion._rational_transform(kernel, tau)
            assert value == pytest.approx(np.exp(-GAMMA * tau) / (2.0 * GAMMA), rel=1e-12)

    @pytest.mark.parametrize("tau", [0.0, 0.7, 3.0])
    def test_zero_temperature_ramp(self, tau: float) -> None:
        kernel = _double_pole_kernel()

        def integrand(w: float) -> float:
            return float(2.0 * w * kernel(w)[0].real)

        value, _ = pole_expansion._ramp_transform(kernel, tau, UNIT_BATH)
        expected = _half_line(integrand, tau)
        assert value.real == pytest.approx(expected.real, rel=1e-6, abs=1e-9)
        assert value.imag == pytest.approx(expected.imag, rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("tau", [0.7, 3.0])
    def test_thermal_pole_sum(self, tau: float) -> None:
        kernel = _double_pole_kernel()
        noise = UNIT_BATH.model_copy(update={"temperature": UNIT_BETA_TEMPERATURE})

        def even(w: float) -> float:
            both = thermal_spectrum(noise, np.array([w, -w])) * kernel(np.array([w, -w])).real
            return float(both[0] + both[1])

        def odd(w: float) -> float:
            both = thermal_spectrum(noise, np.array([w, -w])) * kernel(np.array([w, -w])).real
            return float(both[0] - both[1])

        cos_part = quad(even, 0.0, np.inf, weight="cos", wvar=tau, limlst=200)[0]
        sin_part = quad(odd, 0.0, np.inf, weight="sin", wvar=tau, limlst=200)[0]
        expected = complex(cos_part, -sin_part) / (2.0 * np.pi)

        scale = float(np.max(np.abs(kernel.poles)))
        value, _ = pole_expansion._thermal_transform(kernel, tau, noise, scale)
        assert value.real == pytest.approx(expected.real, rel=1e-6, abs=1e-9)
        assert value.imag == pytest.approx(expected.imag, rel=1e-6, abs=1e-9)

    def test_matsubara_cap_too_short(self, mocker: MockerFixture) -> None:
        kernel = _double_pole_kernel()
        noise = UNIT_BATH.model_copy(update={"temperature": UNIT_BETA_TEMPERATURE})
        mocker.patch.object(pole_expansion.settings, "matsubara_max_terms", 5)
        with pytest.raises(QuadratureError, match="Matsubara"):
            pole_expansion._thermal_transform(kernel, 1e-3, noise, 2.3)


@pytest.mark.unit
class TestKernelFractions:
    def test_y14_is_the_zero_delay_y13(self, fig5: Preset) -> None:
        params, drive = fig5.resolve("iii")
        fractions = kernel_fractions(solve_steady_state(params, drive), params, drive)
        y14, error = y14_value(fractions)
        _, y13, _ = y12_y13(fractions, 0.0)
        assert y14 > 0
        assert y14 == y13.real
        assert abs(y13.imag) <= max(1e3 * error, 1e-9 * y14)

    def test_long_delays_stay_finite(self, fig5: Preset) -> None:
        params, drive = fig5.resolve("iii")
        fractions = kernel_fractions(solve_steady_state(params, drive), params, drive)
        y14, _ = y14_value(fractions)
        for tau in (1.0 / params.gamma_cavity, 100.0 / params.gamma_cavity, 1e-2):
            y12, y13, error = y12_y13(fractions, tau)
            assert np.isfinite(y12) and np.isfinite(y13)
            # The Y13 kernel is nonnegative, so its transform peaks at zero delay
            assert abs(y13) <= y14 * (1.0 + 1e-9) + error
