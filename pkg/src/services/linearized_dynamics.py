"""Linearized dynamics around a steady state.

The state vector is (x, u, C, C^dag, sigma, sigma^dag) with x = Q/l and
u = P/(m*omega_m*l), l = sqrt(hbar/(m*omega_m)) the zero-point length, so the
mechanical and optical couplings share the scale G0*|C0| with G0 = chi*l/hbar.
The same drift matrix drives the stability test, both linear-solve oracles
and the pole locations used by the spectral quadrature.
"""

import mpmath
import numpy as np

from src.lib.exceptions import SingularSystemError
from src.lib.logger import get_logger
from src.models.params import CONSTANTS, Detunings, SystemParams
from src.models.results import ComplexArray

logger = get_logger(__name__)

# Row indices of the state vector
X, U, C, C_DAG, SIGMA, SIGMA_DAG = range(6)

# Singular-system threshold on the 2-norm condition number
MAX_CONDITION = 1e14


def optical_spring_constant(params: SystemParams) -> float:
    """kappa0 = chi^2/(m*hbar*omega_m^2), the Kerr shift per unit intensity (rad/s)."""
    return params.chi**2 / (params.mass * CONSTANTS.hbar * params.omega_mech**2)


def zero_point_length(params: SystemParams) -> float:
    """sqrt(hbar/(m*omega_m)) in metres."""
    return float(np.sqrt(CONSTANTS.hbar / (params.mass * params.omega_mech)))


def single_photon_coupling(params: SystemParams) -> float:
    """G0 = chi*l/hbar (rad/s); G0^2 = kappa0*omega_m."""
    return params.chi * zero_point_length(params) / CONSTANTS.hbar


def drift_matrix(c0: complex, delta3: float, params: SystemParams, detunings: Detunings) -> ComplexArray:
    """
    Drift matrix A of the fluctuation equations dX/dt = A X + B in.

    Args:
        c0: Steady cavity amplitude
        delta3: Shifted cavity detuning
        params: System parameters
        detunings: Drive detunings (delta2 is used)

    Returns:
        Complex 6x6 matrix
    """
    wm = params.omega_mech
    g0 = single_photon_coupling(params)
    g = params.g_qubit
    gs = g * params.sigma_z_ss
    c0c = complex(c0).conjugate()

    a = np.zeros((6, 6), dtype=complex)
    a[X, U] = wm
    a[U, X] = -wm
    a[U, U] = -params.gamma_mech
    a[U, C] = g0 * c0c
    a[U, C_DAG] = g0 * c0
    a[C, C] = -(params.gamma_cavity + 1j * delta3)
    a[C, X] = 1j * g0 * c0
    a[C, SIGMA] = -1j * g
    a[C_DAG, C_DAG] = -(params.gamma_cavity - 1j * delta3)
    a[C_DAG, X] = -1j * g0 * c0c
    a[C_DAG, SIGMA_DAG] = 1j * g
    a[SIGMA, SIGMA] = -(params.gamma_qubit + 1j * detunings.delta2)
    a[SIGMA, C] = 1j * gs
    a[SIGMA_DAG, SIGMA_DAG] = -(params.gamma_qubit - 1j * detunings.delta2)
    a[SIGMA_DAG, C_DAG] = -1j * gs
    return a


def input_matrix(params: SystemParams) -> ComplexArray:
    """
    Input matrix B; columns are (c_in, c_in^dag, d_in, d_in^dag, xi).

    The xi column carries 1/(m*omega_m*l) so that xi stays in newtons.
    """
    b = np.zeros((6, 5), dtype=complex)
    root_c = np.sqrt(2.0 * params.gamma_cavity)
    root_a = np.sqrt(2.0 * params.gamma_qubit)
    b[C, 0] = root_c
    b[C_DAG, 1] = root_c
    b[SIGMA, 2] = root_a
    b[SIGMA_DAG, 3] = root_a
    b[U, 4] = 1.0 / (params.mass * params.omega_mech * zero_point_length(params))
    return b


def system_poles(a: ComplexArray) -> ComplexArray:
    """Complex frequencies omega_k = i*lambda_k at which (-i*omega - A) is singular."""
    return 1j * np.linalg.eigvals(a)


def is_stable(a: ComplexArray) -> bool:
    """All eigenvalues of A strictly in the left half plane."""
    return bool(np.all(np.linalg.eigvals(a).real < 0.0))


def solve_frequency_domain(a: ComplexArray, omega: float, rhs: ComplexArray) -> ComplexArray:
    """
    Solve (-i*omega*I - A) X = rhs.

    Raises:
        SingularSystemError: If the system is singular or its condition number exceeds MAX_CONDITION
    """
    m = -1j * omega * np.eye(a.shape[0]) - a
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSystemError(
            f"Frequency-domain system singular at omega={omega:.6g} rad/s (condition number {cond:.3g})",
            details={"omega": omega, "condition_number": cond},
        )
    try:
        return np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(
            f"Frequency-domain system singular at omega={omega:.6g} rad/s",
            details={"omega": omega, "condition_number": cond},
        ) from e


def solve_frequency_domain_mp(
    c0: complex,
    delta3: float,
    params: SystemParams,
    detunings: Detunings,
    omega: float,
    rhs_row: int,
    rhs_value: complex,
    dps: int = 40,
) -> list[complex]:
    """
    Extended-precision solve of (-i*omega*I - A) X = rhs_value * e_{rhs_row}.

    The matrix is rebuilt from the raw parameters in mpmath arithmetic rather
    than converted from the double-precision drift matrix.

    Returns:
        Solution vector rounded back to Python complex numbers
    """
    with mpmath.workdps(dps):
        j = mpmath.mpc(0, 1)
        hbar = mpmath.mpf(CONSTANTS.hbar)
        wm = mpmath.mpf(params.omega_mech)
        chi = mpmath.mpf(params.chi)
        mass = mpmath.mpf(params.mass)
        g = mpmath.mpf(params.g_qubit)
        gs = g * mpmath.mpf(params.sigma_z_ss)
        gc = mpmath.mpf(params.gamma_cavity)
        ga = mpmath.mpf(params.gamma_qubit)
        d2 = mpmath.mpf(detunings.delta2)
        d3 = mpmath.mpf(delta3)
        w = mpmath.mpf(omega)
        cc = mpmath.mpc(c0.real, c0.imag)
        ccc = mpmath.conj(cc)
        g0 = chi * mpmath.sqrt(hbar / (mass * wm)) / hbar

        a = mpmath.zeros(6, 6)
        a[X, U] = wm
        a[U, X] = -wm
        a[U, U] = -mpmath.mpf(params.gamma_mech)
        a[U, C] = g0 * ccc
        a[U, C_DAG] = g0 * cc
        a[C, C] = -(gc + j * d3)
        a[C, X] = j * g0 * cc
        a[C, SIGMA] = -j * g
        a[C_DAG, C_DAG] = -(gc - j * d3)
        a[C_DAG, X] = -j * g0 * ccc
        a[C_DAG, SIGMA_DAG] = j * g
        a[SIGMA, SIGMA] = -(ga + j * d2)
        a[SIGMA, C] = j * gs
        a[SIGMA_DAG, SIGMA_DAG] = -(ga - j * d2)
        a[SIGMA_DAG, C_DAG] = -j * gs

        m = -j * w * mpmath.eye(6) - a
        rhs = mpmath.zeros(6, 1)
        rhs[rhs_row] = mpmath.mpc(rhs_value.real, rhs_value.imag)
        try:
            sol = mpmath.lu_solve(m, rhs)
        except ZeroDivisionError as e:
            raise SingularSystemError(
                f"Extended-precision system singular at omega={omega:.6g} rad/s",
                details={"omega": omega},
            ) from e
        return [complex(sol[i]) for i in range(6)]
