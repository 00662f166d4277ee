"""First-order probe response: sideband amplitudes, rescaled output field and sweeps."""

from typing import Literal

import numpy as np

from src.lib.concurrency import parallel_map
from src.lib.exceptions import (
    DegenerateParameterError,
    HybridQEDException,
    SingularSystemError,
    ValidationError,
)
from src.lib.logger import get_logger
from src.models.params import CONSTANTS, Detunings, DriveConfig, GridSpec, SystemParams
from src.models.results import (
    AForm,
    GainSummary,
    LambdaSet,
    ProbeResponse,
    ResponseMethod,
    ResponseSweep,
    SteadyState,
)
from src.services.linearized_dynamics import (
    C,
    C_DAG,
    drift_matrix,
    solve_frequency_domain,
    solve_frequency_domain_mp,
)
from src.services.parameter_service import derive_detunings, ensure_valid
from src.services.steady_state_service import solve_steady_state

logger = get_logger(__name__)

SweepMethod = Literal["closed", "solve", "both"]


def mechanical_denominator(params: SystemParams, delta: float) -> complex:
    """M(delta) = m*hbar*(omega_m^2 - i*gamma_m*delta - delta^2)."""
    return (
        params.mass
        * CONSTANTS.hbar
        * (params.omega_mech**2 - 1j * params.gamma_mech * delta - delta**2)
    )


def _raw_lambdas(
    steady: SteadyState, params: SystemParams, delta2: float, delta: float
) -> tuple[complex, complex, complex]:
    m_of_delta = mechanical_denominator(params, delta)
    if m_of_delta == 0:
        raise DegenerateParameterError(
            f"M(delta) vanishes at delta={delta:.6g} rad/s (gamma_m = 0 on mechanical resonance)",
            details={"delta": delta},
        )
    lam3 = 1j * params.chi**2 * steady.intensity / m_of_delta
    lam1 = params.gamma_cavity - 1j * steady.delta3 - 1j * delta + lam3
    lam2 = params.g_qubit**2 * params.sigma_z_ss / (params.gamma_qubit - 1j * delta2 - 1j * delta)
    return lam1, lam2, lam3


def lambda_coeffs(steady: SteadyState, params: SystemParams, detunings: Detunings) -> LambdaSet:
    """
    Lambda coefficients of the probe equations at detunings.delta.

    Raises:
        DegenerateParameterError: If M(delta) = 0
    """
    delta = detunings.delta
    lam1, lam2, lam3 = _raw_lambdas(steady, params, detunings.delta2, delta)
    mirror1, mirror2, _ = _raw_lambdas(steady, params, detunings.delta2, -delta)
    lam1_plus = mirror1.conjugate()
    lam2_plus = mirror2.conjugate()
    return LambdaSet(
        lambda1=lam1,
        lambda2=lam2,
        lambda3=lam3,
        lambda1_plus=lam1_plus,
        lambda2_plus=lam2_plus,
        a_factor=(lam1 - lam3) * (lam1_plus + lam3),
        m_of_delta=mechanical_denominator(params, delta),
        delta3=steady.delta3,
    )


def c_minus_closed_form(lam: LambdaSet, epsilon: float, *, a_form: AForm = "printed") -> complex:
    """
    Closed-form probe sideband amplitude C-.

    Args:
        lam: Lambda coefficients at the probe detuning
        epsilon: Probe amplitude
        a_form: "printed" uses A = (l1 - l3)(l1+ + l3), which the linear solve confirms;
            "flipped" uses (l1 - l3)(l1+ - l3) for comparison

    Raises:
        SingularSystemError: If the denominator vanishes
    """
    if a_form == "printed":
        a_factor = lam.a_factor
    else:
        a_factor = (lam.lambda1 - lam.lambda3) * (lam.lambda1_plus - lam.lambda3)
    denominator = (
        a_factor
        + 2j * lam.delta3 * lam.lambda3
        + lam.lambda2_plus * lam.lambda2
        - lam.lambda2_plus * lam.lambda1
        - lam.lambda1_plus * lam.lambda2
    )
    if denominator == 0:
        raise SingularSystemError("Closed-form probe denominator vanishes (exact pole)")
    return epsilon * (lam.lambda1 - lam.lambda2) / denominator


def epsilon_out(c_minus: complex, gamma_cavity: float, epsilon: float) -> tuple[complex, float, float]:
    """
    Rescaled output field and its quadratures.

    Returns:
        (eps_out, mu_p, nu_p) with eps_out = 2*gamma_c*C-/epsilon

    Raises:
        ValidationError: If epsilon is not positive
    """
    if not epsilon > 0:
        raise ValidationError("probe amplitude must be positive to rescale the output field")
    eps_out = 2.0 * gamma_cavity * c_minus / epsilon
    mu_p = 2.0 * gamma_cavity * c_minus.real / epsilon
    nu_p = 2.0 * gamma_cavity * c_minus.imag / epsilon
    return eps_out, mu_p, nu_p


def _response(
    c_minus: complex, c_plus: complex, params: SystemParams, epsilon: float, method: ResponseMethod
) -> ProbeResponse:
    eps_out, mu_p, nu_p = epsilon_out(c_minus, params.gamma_cavity, epsilon)
    return ProbeResponse(
        c_minus=complex(c_minus),
        c_plus=complex(c_plus),
        eps_out=complex(eps_out),
        mu_p=float(mu_p),
        nu_p=float(nu_p),
        method=method,
    )


def response_closed_form(
    steady: SteadyState,
    params: SystemParams,
    detunings: Detunings,
    epsilon: float,
    *,
    a_form: AForm = "printed",
) -> ProbeResponse:
    """Closed-form response; C+ has no closed form and is reported as nan."""
    c_minus = c_minus_closed_form(lambda_coeffs(steady, params, detunings), epsilon, a_form=a_form)
    return _response(
        c_minus, complex(float("nan"), float("nan")), params, epsilon, ResponseMethod.CLOSED_FORM
    )


def response_linear_solve(
    steady: SteadyState,
    params: SystemParams,
    detunings: Detunings,
    epsilon: float,
    *,
    extended_precision: bool = False,
) -> ProbeResponse:
    """
    Probe response from the linearized equations at the probe sideband.

    The e^{-i delta t} components of (x, u, C, C^dag, sigma, sigma^dag) are
    (x-, u-, C-, C+*, L-, L+*); x+ = conj(x-) because the displacement is real.

    Args:
        steady: Steady state
        params: System parameters
        detunings: Detunings (delta is the probe detuning)
        epsilon: Probe amplitude
        extended_precision: Solve in 40-digit arithmetic

    Raises:
        SingularSystemError: If the system is singular (condition number in details)
    """
    if extended_precision:
        solution = solve_frequency_domain_mp(
            steady.c0, steady.delta3, params, detunings, detunings.delta, C, complex(epsilon)
        )
        c_minus, c_plus_conj = solution[C], solution[C_DAG]
    else:
        a = drift_matrix(steady.c0, steady.delta3, params, detunings)
        rhs = np.zeros(6, dtype=complex)
        rhs[C] = epsilon
        solution_arr = solve_frequency_domain(a, detunings.delta, rhs)
        c_minus, c_plus_conj = complex(solution_arr[C]), complex(solution_arr[C_DAG])
    return _response(
        c_minus, c_plus_conj.conjugate(), params, epsilon, ResponseMethod.LINEAR_SOLVE
    )


def _relative_deviation(a: complex, b: complex) -> float:
    scale = abs(b)
    return abs(a - b) / scale if scale > 0 else abs(a - b)


def sweep_response(
    params: SystemParams,
    drive: DriveConfig,
    grid: GridSpec,
    method: SweepMethod = "closed",
    *,
    threads: int | None = None,
) -> ResponseSweep:
    """
    Probe response over a detuning grid.

    The steady state is solved once. Points that fail become NaN rows with a
    flag instead of aborting the sweep.

    Args:
        params: System parameters
        drive: Drive configuration (omega_probe is replaced by each grid value)
        grid: Probe-detuning grid (rad/s)
        method: "closed", "solve" or "both"
        threads: Worker threads

    Returns:
        ResponseSweep ordered by grid index
    """
    ensure_valid(params, drive, probe=True)
    steady = solve_steady_state(params, drive)
    base = derive_detunings(params, drive)
    deltas = np.asarray(grid.values(), dtype=float)
    epsilon = drive.epsilon if drive.epsilon > 0 else 1.0

    primary_method = ResponseMethod.LINEAR_SOLVE if method == "solve" else ResponseMethod.CLOSED_FORM

    def evaluate(delta: float) -> tuple[ProbeResponse, ProbeResponse | None, str]:
        detunings = base.model_copy(update={"delta": float(delta)})
        try:
            if method == "solve":
                return response_linear_solve(steady, params, detunings, epsilon), None, ""
            primary = response_closed_form(steady, params, detunings, epsilon)
            if method == "both":
                return primary, response_linear_solve(steady, params, detunings, epsilon), ""
            return primary, None, ""
        except HybridQEDException as e:
            logger.warning(f"Sweep point delta={delta:.6g} failed: {e.message}")
            alternate = ProbeResponse.failed(ResponseMethod.LINEAR_SOLVE) if method == "both" else None
            return ProbeResponse.failed(primary_method), alternate, e.message

    logger.info(f"Probe sweep: {deltas.size} points, method={method}")
    results = parallel_map(evaluate, deltas.tolist(), threads)

    responses = tuple(r[0] for r in results)
    flags = tuple(r[2] for r in results)
    alternates: tuple[ProbeResponse, ...] = ()
    deviation = np.full(deltas.size, np.nan)
    if method == "both":
        alternates = tuple(r[1] for r in results if r[1] is not None)
        for i, (primary, alternate, _) in enumerate(results):
            if alternate is not None:
                deviation[i] = _relative_deviation(primary.c_minus, alternate.c_minus)
        finite = deviation[np.isfinite(deviation)]
        if finite.size:
            logger.info(f"Closed form vs linear solve: max relative deviation {finite.max():.3e}")

    return ResponseSweep(
        detuning_grid=deltas,
        responses=responses,
        steady=steady,
        omega_mech=params.omega_mech,
        flags=flags,
        deviation=deviation,
        alternates=alternates,
    )


def gain_summary(sweep: ResponseSweep) -> GainSummary:
    """
    Gain and transparency features of a sweep's mu_p curve.

    NaN rows are skipped.
    """
    mu = sweep.mu_p
    deltas = sweep.detuning_grid
    ok = np.isfinite(mu)
    if not ok.any():
        return GainSummary(float("nan"), float("nan"), float("nan"), ())
    mu_ok, d_ok = mu[ok], deltas[ok]
    i_min = int(np.argmin(mu_ok))

    crossings: list[float] = []
    for k in range(mu_ok.size - 1):
        m0, m1 = mu_ok[k], mu_ok[k + 1]
        if m0 == 0:
            crossings.append(float(d_ok[k]))
        elif m0 * m1 < 0:
            crossings.append(float(d_ok[k] + (d_ok[k + 1] - d_ok[k]) * m0 / (m0 - m1)))

    return GainSummary(
        max_gain=max(0.0, float(-mu_ok[i_min])),
        mu_min=float(mu_ok[i_min]),
        delta_at_min=float(d_ok[i_min]),
        zero_crossings=tuple(crossings),
    )
