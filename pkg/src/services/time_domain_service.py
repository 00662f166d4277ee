"""Time-domain oracle: nonlinear mean-field integration, sideband demodulation and cross-checks.

The integrated variables are y = q/l and v = p/(m*omega_m*l) with l the
zero-point length, plus the cavity amplitude c and qubit coherence sigma in
the drive's rotating frame:

    dy/dt     = omega_m v
    dv/dt     = -omega_m y - gamma_m v + G0 |c|^2
    dc/dt     = -(gamma_c + i delta1) c + i G0 y c - i g sigma + Omega + eps e^{-i delta t}
    dsigma/dt = -(gamma_a + i delta2) sigma + i g <sigma_z> c
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from src.lib.concurrency import parallel_map
from src.lib.config import settings
from src.lib.exceptions import DemodulationError, HybridQEDException, IntegrationError
from src.lib.logger import get_logger
from src.models.params import Detunings, DriveConfig, SystemParams
from src.models.presets import Preset, load_preset
from src.models.results import (
    ComplexArray,
    SteadyState,
    DemodulationResult,
    FloatArray,
    TrajectoryResult,
    ValidationReport,
    ValidationRow,
)
from src.services.linearized_dynamics import (
    C,
    C_DAG,
    SIGMA,
    SIGMA_DAG,
    U,
    X,
    drift_matrix,
    single_photon_coupling,
    solve_frequency_domain,
    zero_point_length,
)
from src.services.parameter_service import derive_detunings, ensure_valid
from src.services.probe_response_service import response_linear_solve
from src.services.steady_state_service import solve_steady_state

logger = get_logger(__name__)

# Largest residual power fraction for which the three-frequency ansatz holds
ANSATZ_RESIDUAL_LIMIT = 1e-4

# Relative deviation for a passing validation row
VALIDATION_TOL = 1e-3

# Mechanical periods in the flatness test of an undriven-probe trajectory
_FLATNESS_PERIODS = 10

# Integrator noise floor, in units of ode_rtol times the carrier amplitude
_NOISE_FLOOR_FACTOR = 10.0

# Minimum fitted phase advance delta*window
_MIN_BEAT_PHASE = 4.0 * np.pi


@dataclass(frozen=True)
class _Model:
    """Constants of the right-hand side, resolved once per trajectory."""

    omega_mech: float
    gamma_mech: float
    gamma_cavity: float
    gamma_qubit: float
    g0: float
    g: float
    g_sigma: float
    delta1: float
    delta2: float
    delta: float
    big_omega: float
    epsilon: float

    def rhs(self, t: float, z: FloatArray) -> FloatArray:
        y, v, cr, ci, sr, si = z
        c = complex(cr, ci)
        s = complex(sr, si)
        dc = (
            -(self.gamma_cavity + 1j * self.delta1) * c
            + 1j * self.g0 * y * c
            - 1j * self.g * s
            + self.big_omega
            + self.epsilon * np.exp(-1j * self.delta * t)
        )
        ds = -(self.gamma_qubit + 1j * self.delta2) * s + 1j * self.g_sigma * c
        return np.array(
            [
                self.omega_mech * v,
                -self.omega_mech * y - self.gamma_mech * v + self.g0 * (cr * cr + ci * ci),
                dc.real,
                dc.imag,
                ds.real,
                ds.imag,
            ]
        )

    def jacobian(self, t: float, z: FloatArray) -> FloatArray:
        y, _, cr, ci, _, _ = z
        wm, g0, g, gs = self.omega_mech, self.g0, self.g, self.g_sigma
        gc, ga, d1, d2 = self.gamma_cavity, self.gamma_qubit, self.delta1, self.delta2
        return np.array(
            [
                [0.0, wm, 0.0, 0.0, 0.0, 0.0],
                [-wm, -self.gamma_mech, 2.0 * g0 * cr, 2.0 * g0 * ci, 0.0, 0.0],
                [-g0 * ci, 0.0, -gc, d1 - g0 * y, 0.0, g],
                [g0 * cr, 0.0, -d1 + g0 * y, -gc, -g, 0.0],
                [0.0, 0.0, 0.0, -gs, -ga, d2],
                [0.0, 0.0, gs, 0.0, -d2, -ga],
            ]
        )


def _model(params: SystemParams, drive: DriveConfig, detunings: Detunings) -> _Model:
    return _Model(
        omega_mech=params.omega_mech,
        gamma_mech=params.gamma_mech,
        gamma_cavity=params.gamma_cavity,
        gamma_qubit=params.gamma_qubit,
        g0=single_photon_coupling(params),
        g=params.g_qubit,
        g_sigma=params.g_qubit * params.sigma_z_ss,
        delta1=detunings.delta1,
        delta2=detunings.delta2,
        delta=detunings.delta,
        big_omega=drive.big_omega,
        epsilon=drive.epsilon,
    )


def default_t_final(params: SystemParams) -> float:
    """max(20/gamma_c, min(5/gamma_m, ode_max_periods mechanical periods))."""
    period = 2.0 * np.pi / params.omega_mech
    return max(
        20.0 / params.gamma_cavity,
        min(5.0 / params.gamma_mech, settings.ode_max_periods * period),
    )


def _sample_step(params: SystemParams, drive: DriveConfig, delta: float, dt_hint: float | None) -> float:
    """Sampling step; with a probe, an integer number of samples spans one beat period."""
    period = 2.0 * np.pi / params.omega_mech
    probe_on = drive.epsilon > 0 and delta != 0
    beat = 2.0 * np.pi / abs(delta) if probe_on else np.inf
    step = dt_hint if dt_hint is not None else min(period, beat) / settings.samples_per_period
    if probe_on:
        step = beat / int(np.ceil(beat / step))
    return float(step)


def fit_ansatz(
    time_grid: FloatArray, c_t: ComplexArray, delta: float
) -> tuple[complex, complex, complex, float]:
    """
    Least-squares fit of c(t) = C0 + C+ e^{i delta t} + C- e^{-i delta t}.

    Returns:
        (C0, C+, C-, residual power as a fraction of the total power)
    """
    basis = np.column_stack(
        [np.ones_like(time_grid), np.exp(1j * delta * time_grid), np.exp(-1j * delta * time_grid)]
    ).astype(complex)
    coeffs, *_ = np.linalg.lstsq(basis, c_t, rcond=None)
    residual = c_t - basis @ coeffs
    total = float(np.vdot(c_t, c_t).real)
    power = float(np.vdot(residual, residual).real) / total if total > 0 else 0.0
    return complex(coeffs[0]), complex(coeffs[1]), complex(coeffs[2]), power


def _flat(values: FloatArray, floor: float) -> bool:
    peak = float(np.max(np.abs(values)))
    if peak == 0:
        return True
    return float(np.ptp(values)) <= settings.ode_settle_tol * peak + floor


def _settled(
    times: FloatArray, ys: FloatArray, cs: ComplexArray, delta: float, probe_on: bool, period: float
) -> bool:
    """Convergence test on the samples recorded so far."""
    floor = _NOISE_FLOOR_FACTOR * settings.ode_rtol * float(np.max(np.abs(cs))) if cs.size else 0.0
    if not probe_on:
        window = times >= times[-1] - _FLATNESS_PERIODS * period
        if times[-1] - times[0] < _FLATNESS_PERIODS * period:
            return False
        return _flat(np.abs(cs[window]), floor) and _flat(ys[window], _NOISE_FLOOR_FACTOR * settings.ode_rtol)

    # Envelope periodicity: consecutive beat windows must demodulate to the same amplitudes
    beat = 2.0 * np.pi / abs(delta)
    if times[-1] - times[0] < 4.0 * beat:
        return False
    last = times >= times[-1] - 2.0 * beat
    prev = (times >= times[-1] - 4.0 * beat) & (times < times[-1] - 2.0 * beat)
    c0_a, _, cm_a, _ = fit_ansatz(times[last], cs[last], delta)
    c0_b, _, cm_b, _ = fit_ansatz(times[prev], cs[prev], delta)
    tol = settings.ode_envelope_tol
    return abs(c0_a - c0_b) <= tol * abs(c0_a) + floor and abs(cm_a - cm_b) <= tol * abs(cm_a) + floor


def integrate_mean_field(
    params: SystemParams,
    drive: DriveConfig,
    t_final: float | None = None,
    dt_hint: float | None = None,
    *,
    initial_state: Sequence[complex] | None = None,
    early_exit: bool = True,
) -> TrajectoryResult:
    """
    Integrate the nonlinear mean-field equations with <sigma_z> frozen.

    The run proceeds in chunks of ode_chunk_periods mechanical periods and
    stops at the first chunk boundary where the convergence test passes
    (flat |c| and q without a probe, a periodic demodulated envelope with one).

    Args:
        params: System parameters
        drive: Drive configuration; epsilon > 0 switches the probe on at t = 0
        t_final: Integration time (s); defaults to default_t_final(params)
        dt_hint: Sampling step (s); rounded down to fit the beat period
        initial_state: (q [m], p [kg m/s], c, sigma); zeros when omitted
        early_exit: Stop once converged

    Returns:
        TrajectoryResult sampled on a uniform grid from t = 0

    Raises:
        IntegrationError: On integrator failure or divergence of |c|
    """
    ensure_valid(params, drive)
    detunings = derive_detunings(params, drive)
    model = _model(params, drive, detunings)
    length = zero_point_length(params)
    momentum_scale = params.mass * params.omega_mech * length

    if initial_state is None:
        z = np.zeros(6)
    else:
        q, p, c, s = (complex(v) for v in initial_state)
        z = np.array([q.real / length, p.real / momentum_scale, c.real, c.imag, s.real, s.imag])

    t_end = default_t_final(params) if t_final is None else float(t_final)
    period = 2.0 * np.pi / params.omega_mech
    probe_on = drive.epsilon > 0 and detunings.delta != 0
    dt = _sample_step(params, drive, detunings.delta, dt_hint)
    chunk_samples = max(1, int(round(settings.ode_chunk_periods * period / dt)))
    total_samples = int(np.floor(t_end / dt + 1e-9))

    c_scale = max(drive.big_omega, drive.epsilon) / params.gamma_cavity
    c_scale = max(c_scale, float(np.hypot(z[2], z[3])))
    y_scale = max(model.g0 * c_scale**2 / params.omega_mech, float(np.hypot(z[0], z[1])), 1.0)
    atol = settings.ode_atol_scale * np.array(
        [y_scale, y_scale, c_scale or 1.0, c_scale or 1.0, c_scale or 1.0, c_scale or 1.0]
    )
    divergence_bound = settings.ode_divergence_factor * c_scale

    logger.info(
        f"Mean-field integration: t_final={t_end:.3e} s, dt={dt:.3e} s, "
        f"method={settings.ode_method}, probe={'on' if probe_on else 'off'}"
    )

    times: list[FloatArray] = [np.array([0.0])]
    states: list[FloatArray] = [z[:, None]]
    converged = False
    settle_time = float("nan")
    index = 0
    while index < total_samples:
        stop = min(index + chunk_samples, total_samples)
        t_eval = np.arange(index + 1, stop + 1) * dt
        sol = solve_ivp(
            model.rhs,
            (index * dt, stop * dt),
            z,
            method=settings.ode_method,
            t_eval=t_eval,
            rtol=settings.ode_rtol,
            atol=atol,
            jac=model.jacobian,
        )
        if sol.status < 0:
            raise IntegrationError(
                f"Integrator failed near t={sol.t[-1] if sol.t.size else index * dt:.3e} s: {sol.message}",
                details={"t": float(index * dt), "method": settings.ode_method},
            )
        times.append(sol.t)
        states.append(sol.y)
        z = sol.y[:, -1]
        index = stop

        peak = float(np.max(np.hypot(sol.y[2], sol.y[3])))
        if divergence_bound > 0 and peak > divergence_bound:
            raise IntegrationError(
                f"|c| reached {peak:.3e}, beyond {settings.ode_divergence_factor:.0e} x drive/gamma_c",
                details={"t": float(sol.t[-1]), "peak": peak},
            )

        if early_exit:
            t_all = np.concatenate(times)
            y_all = np.concatenate(states, axis=1)
            c_all = y_all[2] + 1j * y_all[3]
            if _settled(t_all, y_all[0], c_all, detunings.delta, probe_on, period):
                converged = True
                settle_time = float(t_all[-1])
                logger.debug(f"Trajectory settled at t={settle_time:.3e} s")
                break

    t_all = np.concatenate(times)
    y_all = np.concatenate(states, axis=1)
    if not converged and not early_exit:
        converged = _settled(
            t_all, y_all[0], y_all[2] + 1j * y_all[3], detunings.delta, probe_on, period
        )
    if not converged:
        logger.warning(f"Trajectory did not settle within {t_all[-1]:.3e} s")

    return TrajectoryResult(
        time_grid=t_all,
        q_t=y_all[0] * length,
        p_t=y_all[1] * momentum_scale,
        c_t=y_all[2] + 1j * y_all[3],
        sigma_t=y_all[4] + 1j * y_all[5],
        converged=converged,
        settle_time=settle_time,
    )


def demodulate(trajectory: TrajectoryResult, detunings: Detunings) -> DemodulationResult:
    """
    Extract C0, C+ and C- from the tail of a trajectory.

    The window holds an integer number of beat periods 2*pi/delta taken from
    the latter half of the trajectory, at most demod_periods of them, so the
    probe switch-on transient stays out of the fit.

    Raises:
        DemodulationError: If delta is zero or the window spans less than two beat periods
    """
    delta = detunings.delta
    if delta == 0:
        raise DemodulationError("delta = 0: sidebands coincide with the carrier")
    if not trajectory.converged:
        logger.warning("Demodulating an unconverged trajectory")

    t = trajectory.time_grid
    beat = 2.0 * np.pi / abs(delta)
    available = int(np.floor(0.5 * (t[-1] - t[0]) / beat + 1e-9))
    periods = min(settings.demod_periods, available)
    if abs(delta) * periods * beat < _MIN_BEAT_PHASE:
        raise DemodulationError(
            f"Only {available} beat periods in the latter half of the run; the fit needs delta*window >= 4*pi",
            details={"delta": delta, "duration": float(t[-1] - t[0])},
        )

    # Half-open window so the fit sees whole periods
    start = t[-1] - periods * beat
    window = t > start + 1e-9 * beat
    c0, c_plus, c_minus, residual = fit_ansatz(t[window], trajectory.c_t[window], delta)
    valid = residual <= ANSATZ_RESIDUAL_LIMIT
    if not valid:
        logger.warning(f"Three-frequency ansatz residual {residual:.3e} above {ANSATZ_RESIDUAL_LIMIT:.0e}")
    return DemodulationResult(
        c0_est=c0,
        c_minus_est=c_minus,
        c_plus_est=c_plus,
        residual_power=residual,
        ansatz_valid=valid,
        beat_periods=periods,
    )


def steady_seed(steady: SteadyState) -> tuple[complex, complex, complex, complex]:
    """(q, p, c, sigma) at the analytic probe-off fixed point."""
    return complex(steady.q0), complex(steady.p0), steady.c0, steady.l0


def sideband_seed(
    steady: SteadyState, params: SystemParams, detunings: Detunings, epsilon: float
) -> tuple[complex, complex, complex, complex]:
    """
    (q, p, c, sigma) at t = 0 on the first-order probe-driven orbit.

    Only the second-order transient is left, decaying at the mechanical rate.

    Raises:
        SingularSystemError: If the linear system at delta is singular
    """
    a = drift_matrix(steady.c0, steady.delta3, params, detunings)
    rhs = np.zeros(6, dtype=complex)
    rhs[C] = epsilon
    sol = solve_frequency_domain(a, detunings.delta, rhs)
    length = zero_point_length(params)
    # x and u are real: the e^{+i delta t} parts are the conjugates
    q = steady.q0 + 2.0 * sol[X].real * length
    p = 2.0 * sol[U].real * params.mass * params.omega_mech * length
    c = steady.c0 + sol[C] + np.conj(sol[C_DAG])
    sigma = steady.l0 + sol[SIGMA] + np.conj(sol[SIGMA_DAG])
    return complex(q), complex(p), complex(c), complex(sigma)


def _relative(a: complex | float, b: complex | float) -> float:
    scale = abs(b)
    return float(abs(a - b) / scale) if scale > 0 else float(abs(a - b))


def _rows_for_variant(
    preset: Preset, label: str, response_points: int
) -> list[ValidationRow]:
    params, drive = preset.resolve(label)
    ensure_valid(params, drive, probe=True)
    detunings = derive_detunings(params, drive)
    period = 2.0 * np.pi / params.omega_mech

    steady = solve_steady_state(params, drive)
    carrier = integrate_mean_field(
        params, drive.model_copy(update={"epsilon": 0.0}), initial_state=steady_seed(steady)
    )
    tail = carrier.time_grid >= carrier.time_grid[-1] - _FLATNESS_PERIODS * period
    measured = float(np.mean(np.abs(carrier.c_t[tail]) ** 2))
    deviation = _relative(measured, steady.intensity)
    rows = [
        ValidationRow(
            preset=preset.name,
            variant=label,
            check="steady",
            delta=detunings.delta,
            frequency_domain=steady.intensity,
            time_domain=measured,
            deviation=deviation,
            passed=carrier.converged and deviation <= VALIDATION_TOL,
            error="" if carrier.converged else "trajectory did not settle",
        )
    ]

    epsilon = settings.validation_probe_ratio * drive.big_omega
    grid = np.asarray(preset.grid.values(), dtype=float)
    picks = grid[np.unique(np.linspace(0, grid.size - 1, response_points).round().astype(int))]
    for delta in picks:
        probe_drive = drive.model_copy(
            update={"epsilon": epsilon, "omega_probe": drive.omega_drive + float(delta)}
        )
        probe_detunings = detunings.model_copy(update={"delta": float(delta)})
        try:
            expected = response_linear_solve(steady, params, probe_detunings, epsilon).c_minus
            seed = sideband_seed(steady, params, probe_detunings, epsilon)
            trajectory = integrate_mean_field(params, probe_drive, initial_state=seed)
            found = demodulate(trajectory, probe_detunings).c_minus_est
            deviation = _relative(found, expected)
            rows.append(
                ValidationRow(
                    preset=preset.name,
                    variant=label,
                    check="response",
                    delta=float(delta),
                    frequency_domain=expected,
                    time_domain=found,
                    deviation=deviation,
                    passed=trajectory.converged and deviation <= VALIDATION_TOL,
                    error="" if trajectory.converged else "trajectory did not settle",
                )
            )
        except HybridQEDException as e:
            rows.append(_error_row(preset.name, label, "response", float(delta), e.message))
    return rows


def _error_row(preset: str, variant: str, check: str, delta: float, message: str) -> ValidationRow:
    nan = float("nan")
    return ValidationRow(
        preset=preset,
        variant=variant,
        check="response" if check == "response" else "steady",
        delta=delta,
        frequency_domain=nan,
        time_domain=nan,
        deviation=nan,
        passed=False,
        error=message,
    )


def validate_suite(
    presets: Sequence[str | Preset],
    variant: str | None = None,
    *,
    response_points: int = 5,
    threads: int | None = None,
    chi_literal: bool | None = None,
) -> ValidationReport:
    """
    Cross-check the frequency-domain modules against mean-field integration.

    Each (preset, variant) yields one steady-state row and response_points
    probe rows. Failures of any kind become error rows.

    Args:
        presets: Preset names or loaded presets
        variant: Single variant label; every variant when omitted
        response_points: Probe detunings sampled evenly from the preset grid
        threads: Worker threads across (preset, variant) pairs
        chi_literal: Chi reading for presets given by name (default: settings.chi_literal)

    Returns:
        ValidationReport in input order
    """
    jobs: list[tuple[Preset | None, str, str]] = []
    rows: list[ValidationRow] = []
    for item in presets:
        try:
            preset = load_preset(item, chi_literal=chi_literal) if isinstance(item, str) else item
        except HybridQEDException as e:
            jobs.append((None, str(item), e.message))
            continue
        labels = [variant] if variant is not None else preset.variant_labels
        jobs.extend((preset, label, "") for label in labels)

    def run(job: tuple[Preset | None, str, str]) -> list[ValidationRow]:
        preset, label, load_error = job
        if preset is None:
            return [_error_row(label, "", "steady", float("nan"), load_error)]
        try:
            return _rows_for_variant(preset, label, response_points)
        except HybridQEDException as e:
            logger.warning(f"Validation of {preset.name}/{label} failed: {e.message}")
            return [_error_row(preset.name, label, "steady", float("nan"), e.message)]

    logger.info(f"Validation suite: {len(jobs)} preset variants")
    for chunk in parallel_map(run, jobs, threads):
        rows.extend(chunk)
    report = ValidationReport(rows=tuple(rows))
    logger.info(
        f"Validation finished: {sum(r.passed for r in rows)}/{len(rows)} rows passed, "
        f"max deviation {report.max_deviation:.3e}"
    )
    return report
