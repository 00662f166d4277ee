"""Cross-checks between independent computational paths."""

import numpy as np
import pytest

from src.models.params import DriveConfig, SystemParams
from src.models.presets import Preset
from src.services.fluctuation_service import (
    g2_of_tau,
    gaussian_g2_zero,
    spectral_kernels,
    transfer_coeffs,
    transfer_linear_solve,
)
from src.services.parameter_service import derive_detunings
from src.services.probe_response_service import (
    c_minus_closed_form,
    lambda_coeffs,
    response_closed_form,
    response_linear_solve,
)
from src.services.quadrature import dense_grid_reference, y14_integral, y_integrals
from src.services.steady_state_service import solve_steady_state
from src.services.time_domain_service import validate_suite

SEED = 20240611
DRAWS = 100


def _random_draws(params: SystemParams, drive: DriveConfig) -> list[tuple[SystemParams, DriveConfig]]:
    """Parameter sets scattered by +-50% around a preset."""
    rng = np.random.default_rng(SEED)
    draws = []
    for _ in range(DRAWS):
        factors = rng.uniform(0.5, 1.5, size=5)
        p = params.model_copy(
            update={
                "chi": params.chi * factors[0],
                "g_qubit": params.g_qubit * factors[1],
                "gamma_cavity": params.gamma_cavity * factors[2],
                "gamma_qubit": params.gamma_qubit * factors[3],
            }
        )
        d = drive.model_copy(update={"big_omega": drive.big_omega * factors[4]})
        draws.append((p, d))
    return draws


@pytest.mark.integration
class TestProbeResponsePaths:
    """Closed form against the linearized solve."""

    def test_closed_form_matches_extended_precision(self, fig2: Preset) -> None:
        for params, drive in _random_draws(*fig2.resolve("iii")):
            ss = solve_steady_state(params, drive)
            detunings = derive_detunings(params, drive).model_copy(
                update={"delta": 1.05 * params.omega_mech}
            )
            closed = response_closed_form(ss, params, detunings, drive.epsilon)
            exact = response_linear_solve(ss, params, detunings, drive.epsilon, extended_precision=True)
            assert closed.c_minus == pytest.approx(exact.c_minus, rel=1e-9)

    def test_flipped_form_disagrees_on_resonance(self, fig2: Preset) -> None:
        params, drive = fig2.resolve("iii")
        ss = solve_steady_state(params, drive)
        detunings = derive_detunings(params, drive).model_copy(update={"delta": params.omega_mech})
        lam = lambda_coeffs(ss, params, detunings)
        printed = c_minus_closed_form(lam, drive.epsilon)
        flipped = c_minus_closed_form(lam, drive.epsilon, a_form="flipped")
        exact = response_linear_solve(ss, params, detunings, drive.epsilon, extended_precision=True)
        assert printed == pytest.approx(exact.c_minus, rel=1e-4)
        assert abs(flipped - exact.c_minus) > 1e-2 * abs(exact.c_minus)

    @pytest.mark.parametrize("ratio", [0.5, 0.95, 1.05, 2.0])
    def test_weak_coupling_reduces_to_bare_cavity(self, fig2: Preset, ratio: float) -> None:
        params, drive = fig2.resolve("iii")
        weak = params.model_copy(update={"chi": 1e-4 * params.chi, "g_qubit": 1e-4 * params.g_qubit})
        ss = solve_steady_state(weak, drive)
        base = derive_detunings(weak, drive)
        delta = ratio * weak.omega_mech
        response = response_closed_form(ss, weak, base.model_copy(update={"delta": delta}), drive.epsilon)
        bare = drive.epsilon / (weak.gamma_cavity + 1j * (base.delta1 - delta))
        assert response.c_minus == pytest.approx(bare, rel=1e-6)


@pytest.mark.integration
class TestTransferPaths:
    def test_random_draws(self, fig2: Preset) -> None:
        rng = np.random.default_rng(SEED + 1)
        for params, drive in _random_draws(*fig2.resolve("iii")):
            ss = solve_steady_state(params, drive)
            detunings = derive_detunings(params, drive)
            omega = float(rng.uniform(-3.0, 3.0) * params.omega_mech)
            closed = transfer_coeffs(ss, params, detunings, omega).as_matrix()[:, 0]
            solved = transfer_linear_solve(ss, params, detunings, omega).as_matrix()[:, 0]
            scale = np.max(np.abs(solved))
            assert np.allclose(closed, solved, rtol=1e-9, atol=1e-12 * scale)


@pytest.mark.integration
@pytest.mark.slow
class TestSpectralIntegrals:
    def test_adaptive_matches_dense_grid(self, fig5: Preset) -> None:
        params, drive = fig5.resolve("iii")
        kernels = spectral_kernels(params, drive)
        y14, _ = y14_integral(kernels)
        adaptive = y_integrals(kernels, 0.0, y14=y14)
        reference = dense_grid_reference(kernels, 0.0)
        assert y14 > 0
        assert reference.y14 == pytest.approx(y14, rel=1e-4)
        assert abs(reference.y12 - adaptive.y12) <= 1e-4 * y14

    def test_gaussian_moments_match_coherence_formula(self, fig5: Preset) -> None:
        params, drive = fig5.resolve("i")
        kernels = spectral_kernels(params, drive)
        series = g2_of_tau(params, drive, [0.0])
        reference = dense_grid_reference(kernels, 0.0)
        gaussian = gaussian_g2_zero(kernels.b0, reference.y14, reference.y12)
        assert gaussian == pytest.approx(series.g2_zero, rel=1e-3)

    def test_g2_is_real_and_finite(self, fig5: Preset) -> None:
        params, drive = fig5.resolve("iii")
        series = g2_of_tau(params, drive, [0.0, 1e-7, 5e-7])
        assert np.all(np.isfinite(series.g2_values))
        assert np.all(series.imag_residue <= 1e-10)
        assert series.flags == ("", "", "")
        assert series.y14 > 0


@pytest.mark.integration
@pytest.mark.slow
class TestTimeDomainValidation:
    def test_qubit_only_variant_passes(self, fig3: Preset) -> None:
        params, _ = fig3.resolve("i")
        assert params.chi == 0.0
        report = validate_suite([fig3], "i", response_points=3)
        assert len(report.rows) == 4
        assert [r.check for r in report.rows] == ["steady", "response", "response", "response"]
        assert report.all_passed, [r.error or r.deviation for r in report.rows]
