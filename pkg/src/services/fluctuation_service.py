"""Quantum fluctuations of the output field: noise spectrum, transfer coefficients and g2(tau)."""

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from src.lib.concurrency import parallel_map
from src.lib.config import settings
from src.lib.exceptions import QuadratureError, SingularSystemError, ValidationError
from src.lib.logger import get_logger
from src.models.params import (
    CONSTANTS,
    Detunings,
    DriveConfig,
    NoiseModel,
    SystemParams,
    TauGridSpec,
)
from src.models.results import (
    CoherenceSeries,
    ComplexArray,
    EfrstCoeffs,
    EForm,
    FloatArray,
    OutputCoeffs,
    SpectralKernels,
    SteadyState,
    TransferCoeffs,
    TrendPoint,
    TrendReport,
    YIntegrals,
    YMethod,
)
from src.services import pole_expansion, quadrature
from src.services.linearized_dynamics import (
    C,
    drift_matrix,
    input_matrix,
    solve_frequency_domain,
    system_poles,
)
from src.services.parameter_service import derive_detunings, ensure_valid
from src.services.steady_state_service import solve_steady_state

logger = get_logger(__name__)

# |E| below this fraction of its median over a sweep triggers a warning
NEAR_SINGULAR_RATIO = 1e-6


def _as_array(omega: float | npt.ArrayLike) -> FloatArray:
    return np.atleast_1d(np.asarray(omega, dtype=float))


def thermal_spectrum(noise: NoiseModel, omega: float | npt.ArrayLike) -> FloatArray:
    """
    N(omega) = hbar*gamma_m*m*omega*[1 + coth(hbar*omega/(2 k_B T))].

    Written as hbar*gamma_m*m*omega + 2*gamma_m*m*k_B*T*(x/tanh x) with
    x = hbar*omega/(2 k_B T), which is finite at omega = 0 and reduces to the
    sign-function limit at T = 0.
    """
    w = _as_array(omega)
    hbar = CONSTANTS.hbar
    quantum = hbar * noise.gamma_mech * noise.mass * w
    if noise.temperature == 0:
        return quantum + hbar * noise.gamma_mech * noise.mass * np.abs(w)

    kt = CONSTANTS.k_boltzmann * noise.temperature
    x = hbar * w / (2.0 * kt)
    safe = np.where(x == 0, 1.0, x)
    ratio = np.where(x == 0, 1.0, safe / np.tanh(safe))
    return quantum + 2.0 * noise.gamma_mech * noise.mass * kt * ratio


def _lambda_upper(
    steady: SteadyState, params: SystemParams, delta2: float, w: FloatArray
) -> tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]:
    """Lambda1, Lambda2, Lambda3 and R at frequencies w."""
    r = 1.0 / (
        params.mass
        * CONSTANTS.hbar
        * (params.omega_mech**2 - 1j * params.gamma_mech * w - w**2)
    )
    lam3 = 1j * params.chi**2 * steady.intensity * r
    lam1 = params.gamma_cavity - 1j * steady.delta3 - 1j * w + lam3
    lam2 = params.g_qubit**2 * params.sigma_z_ss / (params.gamma_qubit - 1j * delta2 - 1j * w)
    return lam1, lam2, lam3, r


def efrst_coeffs(
    steady: SteadyState,
    params: SystemParams,
    detunings: Detunings,
    omega: float | npt.ArrayLike,
    *,
    e_form: EForm = "validated",
) -> EfrstCoeffs:
    """
    E, F, R, S, T and the Lambda set at real frequencies omega.

    Args:
        e_form: "validated" uses (L1 - L3)(L1+ + L3) in E, which matches the
            direct solve; "as_printed" keeps (L1 - L3)(L1+ - L3)
    """
    w = _as_array(omega)
    lam1, lam2, lam3, r = _lambda_upper(steady, params, detunings.delta2, w)
    mirror1, mirror2, _, _ = _lambda_upper(steady, params, detunings.delta2, -w)
    lam1_plus = np.conj(mirror1)
    lam2_plus = np.conj(mirror2)

    second = lam1_plus + lam3 if e_form == "validated" else lam1_plus - lam3
    e = (
        (lam1 - lam3) * second
        + 2j * steady.delta3 * lam3
        + lam2_plus * lam2
        - lam2_plus * lam1
        - lam1_plus * lam2
    )
    s = 1.0 / (params.gamma_qubit - 1j * detunings.delta2 - 1j * w)
    t = 1.0 / (params.gamma_qubit + 1j * detunings.delta2 - 1j * w)
    return EfrstCoeffs(
        omega=w,
        e_of_omega=e,
        f_of_omega=lam1 - lam2,
        r_of_omega=r,
        s_of_omega=s,
        t_of_omega=t,
        lambda_upper_1=lam1,
        lambda_upper_2=lam2,
        lambda_upper_3=lam3,
        lambda_upper_1_plus=lam1_plus,
        lambda_upper_2_plus=lam2_plus,
    )


def transfer_coeffs(
    steady: SteadyState,
    params: SystemParams,
    detunings: Detunings,
    omega: float | npt.ArrayLike,
    *,
    e_form: EForm = "validated",
    warn: bool = True,
) -> TransferCoeffs:
    """
    Closed-form C1..C5 at real frequencies omega.

    Raises:
        SingularSystemError: If E(omega) vanishes at a requested frequency
    """
    coeffs = efrst_coeffs(steady, params, detunings, omega, e_form=e_form)
    e, f, r = coeffs.e_of_omega, coeffs.f_of_omega, coeffs.r_of_omega
    s, t = coeffs.s_of_omega, coeffs.t_of_omega

    abs_e = np.abs(e)
    if np.any(abs_e == 0):
        bad = coeffs.omega[abs_e == 0]
        raise SingularSystemError(
            f"E(omega) vanishes at omega={bad[0]:.6g} rad/s",
            details={"omega": bad.tolist()},
        )
    if warn and abs_e.size > 1:
        median = float(np.median(abs_e))
        if np.any(abs_e < NEAR_SINGULAR_RATIO * median):
            logger.warning(f"E(omega) nearly singular: min |E| = {abs_e.min():.3e}, median {median:.3e}")

    chi, g = params.chi, params.g_qubit
    c0 = steady.c0
    root_c = np.sqrt(2.0 * params.gamma_cavity)
    root_a = np.sqrt(2.0 * params.gamma_qubit)
    return TransferCoeffs(
        omega=coeffs.omega,
        c1=root_c * f / e,
        c2=1j * chi**2 * c0**2 * root_c * r / e,
        c3=-1j * g * root_a * f * t / e,
        c4=-(chi**2) * c0**2 * g * root_a * r * s / e,
        c5=(chi**3 * abs(c0) ** 2 * c0 * r**2 + 1j * chi * c0 * f * r) / e,
    )


def transfer_linear_solve(
    steady: SteadyState, params: SystemParams, detunings: Detunings, omega: float
) -> TransferCoeffs:
    """
    C1..C5 at one frequency from a direct solve of the fluctuation equations.

    Raises:
        SingularSystemError: If the frequency-domain system is singular
    """
    a = drift_matrix(steady.c0, steady.delta3, params, detunings)
    solution = solve_frequency_domain(a, omega, input_matrix(params))
    row = solution[C]
    w = np.array([float(omega)])
    return TransferCoeffs(
        omega=w,
        c1=row[0:1].copy(),
        c2=row[1:2].copy(),
        c3=row[2:3].copy(),
        c4=row[3:4].copy(),
        c5=row[4:5].copy(),
    )


def coherent_output(steady: SteadyState, params: SystemParams, drive: DriveConfig) -> complex:
    """b0 = sqrt(2 gamma_c)*C0 - Omega/sqrt(2 gamma_c)."""
    root_c = np.sqrt(2.0 * params.gamma_cavity)
    return complex(root_c * steady.c0 - drive.big_omega / root_c)


def output_coeffs(
    steady: SteadyState,
    params: SystemParams,
    drive: DriveConfig,
    omega: float | npt.ArrayLike,
    *,
    e_form: EForm = "validated",
    warn: bool = True,
) -> OutputCoeffs:
    """Output coefficients b0..b5 at real frequencies omega."""
    detunings = derive_detunings(params, drive)
    c = transfer_coeffs(steady, params, detunings, omega, e_form=e_form, warn=warn)
    root_c = np.sqrt(2.0 * params.gamma_cavity)
    return OutputCoeffs(
        omega=c.omega,
        b0=coherent_output(steady, params, drive),
        b1=root_c * c.c1 - 1.0,
        b2=root_c * c.c2,
        b3=root_c * c.c3,
        b4=root_c * c.c4,
        b5=root_c * c.c5,
    )


def _bare_poles(params: SystemParams, detunings: Detunings) -> ComplexArray:
    """Poles of R, S and T and their mirrors; the printed forms divide by them."""
    half = 0.5 * params.gamma_mech
    shifted = np.sqrt(complex(params.omega_mech**2 - half**2))
    d2 = detunings.delta2
    ga = params.gamma_qubit
    return np.array(
        [shifted - 1j * half, -shifted - 1j * half, d2 - 1j * ga, -d2 - 1j * ga], dtype=complex
    )


def spectral_kernels(
    params: SystemParams,
    drive: DriveConfig,
    *,
    steady: SteadyState | None = None,
    e_form: EForm = "validated",
) -> SpectralKernels:
    """
    Build the Y12, Y13 and Y14 kernels for the probe-off output field.

    Y12(w) = N(w) B5(-w) B5(w) + B2(-w) B1(w) + B4(-w) B3(w)
    Y13(w) = Y14(w) = N(-w)|B5(w)|^2 + |B2(w)|^2 + |B4(w)|^2
    """
    if steady is None:
        steady = solve_steady_state(params, drive)
    detunings = derive_detunings(params, drive)
    noise = NoiseModel.from_params(params, drive)

    def joint(omega: FloatArray) -> tuple[ComplexArray, ComplexArray]:
        w = _as_array(omega)
        n = w.size
        both = output_coeffs(steady, params, drive, np.concatenate([w, -w]), e_form=e_form, warn=False)
        b1, b3 = both.b1[:n], both.b3[:n]
        b2, b4, b5 = both.b2[:n], both.b4[:n], both.b5[:n]
        b2m, b4m, b5m = both.b2[n:], both.b4[n:], both.b5[n:]
        spectrum = thermal_spectrum(noise, np.concatenate([w, -w]))
        y12 = spectrum[:n] * b5m * b5 + b2m * b1 + b4m * b3
        y13 = spectrum[n:] * np.abs(b5) ** 2 + np.abs(b2) ** 2 + np.abs(b4) ** 2
        return y12, y13.astype(complex)

    def y12_kernel(omega: FloatArray) -> ComplexArray:
        return joint(omega)[0]

    def y13_kernel(omega: FloatArray) -> ComplexArray:
        return joint(omega)[1]

    a = drift_matrix(steady.c0, steady.delta3, params, detunings)
    poles = system_poles(a)
    scale = max(
        params.omega_mech,
        abs(detunings.delta2),
        params.g_qubit,
        params.gamma_cavity,
        abs(detunings.delta1),
    )
    return SpectralKernels(
        y12_kernel=y12_kernel,
        y13_kernel=y13_kernel,
        y14_kernel=y13_kernel,
        joint_kernel=joint,
        b0=coherent_output(steady, params, drive),
        poles=np.concatenate([poles, -np.conj(poles), _bare_poles(params, detunings)]),
        anchors=np.array([0.0]),
        cutoff=settings.quad_cutoff_factor * scale,
        # Every kernel term carries chi and C0
        vanishing=params.chi == 0 or steady.c0 == 0,
    )


def g2_value(b0: complex, y12: complex, y13: complex, y14: float) -> tuple[float, float]:
    """
    g2 from the coherent amplitude and the y-integrals.

    Returns:
        (g2, imaginary residue of the complex evaluation); g2 is nan when
        |b0|^2 + y14 = 0
    """
    n0 = abs(b0) ** 2
    denominator = (n0 + y14) ** 2
    if denominator == 0:
        return float("nan"), 0.0
    numerator = (
        n0**2
        + 2.0 * n0 * y14
        + b0.conjugate() ** 2 * y12
        + b0**2 * y12.conjugate()
        + n0 * (y13 + y13.conjugate())
        + y14**2
        + y13 * y13.conjugate()
        + y12 * y12.conjugate()
    )
    value = numerator / denominator
    return float(value.real), float(abs(value.imag))


def gaussian_g2_zero(b0: complex, n: float, m: complex) -> float:
    """
    g2(0) of a displaced Gaussian field with <G^dag G> = n and <G G> = m.

    [|b0|^4 + 4|b0|^2 n + 2 Re(b0*^2 m) + 2 n^2 + |m|^2]/(|b0|^2 + n)^2
    """
    n0 = abs(b0) ** 2
    denominator = (n0 + n) ** 2
    if denominator == 0:
        return float("nan")
    numerator = n0**2 + 4.0 * n0 * n + 2.0 * (b0.conjugate() ** 2 * m).real + 2.0 * n**2 + abs(m) ** 2
    return float(numerator / denominator)


def _g2_error(b0: complex, y: YIntegrals, g2: float) -> float:
    """First-order propagation of the quadrature errors into g2."""
    n0 = abs(b0) ** 2
    total = n0 + y.y14
    if total == 0 or not np.isfinite(g2):
        return float("nan")
    d_num = (
        2.0 * n0 * 2.0 * y.error
        + 2.0 * (abs(y.y12) + abs(y.y13)) * y.error
        + (2.0 * n0 + 2.0 * y.y14) * y.y14_error
    )
    return float(d_num / total**2 + 2.0 * abs(g2) * y.y14_error / total)


def _quadrature_points(
    kernels: SpectralKernels,
    taus: list[float],
    y14: float,
    y14_error: float,
    threads: int | None,
) -> list[tuple[YIntegrals | None, str]]:
    """Block quadrature; a failed block is retried one delay at a time."""

    def single(tau: float) -> tuple[YIntegrals | None, str]:
        try:
            return quadrature.y_integrals_block(kernels, [tau], y14=y14, y14_error=y14_error)[0], ""
        except QuadratureError as e:
            logger.warning(f"g2 quadrature at tau={tau:.6g} failed: {e.message}")
            return None, e.message

    def block(taus_block: list[float]) -> list[tuple[YIntegrals | None, str]]:
        try:
            values = quadrature.y_integrals_block(
                kernels, taus_block, y14=y14, y14_error=y14_error
            )
            return [(v, "") for v in values]
        except QuadratureError as e:
            if len(taus_block) == 1:
                logger.warning(f"g2 quadrature at tau={taus_block[0]:.6g} failed: {e.message}")
                return [(None, e.message)]
            logger.info(
                f"g2 block tau=[{taus_block[0]:.6g}, {taus_block[-1]:.6g}] failed, "
                f"retrying {len(taus_block)} delays singly"
            )
            return [single(t) for t in taus_block]

    # Blocks and panels are fixed before dispatch
    size = settings.quad_tau_block
    blocks = [taus[i : i + size] for i in range(0, len(taus), size)]
    return [item for chunk in parallel_map(block, blocks, threads) for item in chunk]


def _pole_points(
    fractions: pole_expansion.KernelFractions,
    kernels: SpectralKernels,
    taus: list[float],
    y14: float,
    y14_error: float,
    threads: int | None,
) -> list[tuple[YIntegrals | None, str]]:
    """Pole expansion per delay; delays it cannot handle go to quadrature."""
    values = pole_expansion.y_integrals(fractions, taus, y14, y14_error)
    missing = [i for i, v in enumerate(values) if not isinstance(v, YIntegrals)]
    results: list[tuple[YIntegrals | None, str]] = [
        (v, "") if isinstance(v, YIntegrals) else (None, v.message) for v in values
    ]
    if missing:
        logger.info(f"Pole expansion skipped {len(missing)} delays; integrating them numerically")
        retried = _quadrature_points(kernels, [taus[i] for i in missing], y14, y14_error, threads)
        for i, item in zip(missing, retried):
            results[i] = item
    return results


def g2_of_tau(
    params: SystemParams,
    drive: DriveConfig,
    tau_grid: TauGridSpec | Sequence[float],
    *,
    e_form: EForm = "validated",
    method: YMethod = "poles",
    threads: int | None = None,
) -> CoherenceSeries:
    """
    Second-order coherence of the output field with the probe off.

    The pole expansion evaluates every delay in closed form. The printed
    E(omega) has no drift-matrix counterpart, so e_form="as_printed" always
    integrates numerically, as does any system whose expansion is
    ill-conditioned. Failures flag individual delays with nan instead of
    aborting.

    Args:
        params: System parameters
        drive: Drive configuration (epsilon is ignored)
        tau_grid: Delay grid spec or explicit delays (s)
        e_form: Form of E(omega)
        method: "poles" or "quadrature"
        threads: Worker threads for the quadrature blocks

    Returns:
        CoherenceSeries
    """
    ensure_valid(params, drive, statistics=True)
    taus = np.asarray(
        tau_grid.values() if isinstance(tau_grid, TauGridSpec) else list(tau_grid), dtype=float
    )
    if np.any(taus < 0):
        raise ValidationError("delays must be nonnegative", details={"min": float(taus.min())})
    steady = solve_steady_state(params, drive)
    if not steady.stable:
        logger.warning("Fluctuation spectra computed around an unstable steady state")

    kernels = spectral_kernels(params, drive, steady=steady, e_form=e_form)
    if method == "poles" and e_form == "as_printed":
        logger.info("as_printed E(omega) has no pole expansion; using quadrature")
        method = "quadrature"
    logger.info(
        f"g2: {taus.size} delays, T={drive.temperature:g} K, {kernels.poles.size} poles, method={method}"
    )

    tau_list = taus.tolist()
    results: list[tuple[YIntegrals | None, str]] | None = None
    if method == "poles" and not kernels.vanishing:
        try:
            fractions = pole_expansion.kernel_fractions(steady, params, drive)
            y14, y14_error = pole_expansion.y14_value(fractions)
            results = _pole_points(fractions, kernels, tau_list, y14, y14_error, threads)
        except (QuadratureError, SingularSystemError) as e:
            logger.warning(f"Pole expansion unavailable ({e.message}); falling back to quadrature")
            method = "quadrature"
    if results is None:
        y14, y14_error = quadrature.y14_integral(kernels)
        results = _quadrature_points(kernels, tau_list, y14, y14_error, threads)

    n = taus.size
    g2 = np.full(n, np.nan)
    y12 = np.full(n, np.nan, dtype=complex)
    y13 = np.full(n, np.nan, dtype=complex)
    errors = np.full(n, np.nan)
    residues = np.full(n, np.nan)
    flags: list[str] = []
    for i, (y, flag) in enumerate(results):
        if y is not None:
            y12[i], y13[i] = y.y12, y.y13
            g2[i], residues[i] = g2_value(kernels.b0, y.y12, y.y13, y14)
            errors[i] = _g2_error(kernels.b0, y, g2[i])
            if not np.isfinite(g2[i]):
                flag = "g2 undefined: no output photons"
        flags.append(flag)

    return CoherenceSeries(
        tau_grid=taus,
        g2_values=g2,
        y14=y14,
        y13_of_tau=y13,
        y12_of_tau=y12,
        quadrature_error=errors,
        imag_residue=residues,
        b0=kernels.b0,
        flags=tuple(flags),
        temperature=drive.temperature,
        method=method,
    )


def temperature_trend(
    params: SystemParams,
    drive: DriveConfig,
    temperatures: Sequence[float],
    tau_grid: TauGridSpec | Sequence[float],
    *,
    threads: int | None = None,
) -> TrendReport:
    """
    Nonclassicality measure max|g2 - 1| across bath temperatures.

    Raises:
        ValidationError: If fewer than two temperatures are given or they are not ascending
    """
    temps = [float(t) for t in temperatures]
    if len(temps) < 2:
        raise ValidationError("temperature trend needs at least two temperatures")
    if any(b < a for a, b in zip(temps, temps[1:])):
        raise ValidationError("temperatures must be ascending")

    points: list[TrendPoint] = []
    for temperature in temps:
        series = g2_of_tau(
            params,
            drive.model_copy(update={"temperature": temperature}),
            tau_grid,
            threads=threads,
        )
        points.append(
            TrendPoint(
                temperature=temperature,
                max_abs_deviation=series.max_abs_deviation,
                min_g2=series.min_g2,
                g2_zero=series.g2_zero,
            )
        )

    measures = [p.max_abs_deviation for p in points]
    non_increasing = all(b <= a for a, b in zip(measures, measures[1:]))
    logger.info(f"Temperature trend over {len(temps)} temperatures: non_increasing={non_increasing}")
    return TrendReport(points=tuple(points), non_increasing=non_increasing)
