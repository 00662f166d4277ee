"""Zeroth-order steady state: self-consistent cavity amplitude, displacement and qubit coherence."""

from collections.abc import Sequence

import numpy as np

from src.lib.concurrency import parallel_map
from src.lib.config import settings
from src.lib.exceptions import ConvergenceError, DegenerateParameterError, ValidationError
from src.lib.logger import get_logger
from src.models.params import Diagnostic, DriveConfig, Severity, SystemParams
from src.models.results import BistabilityBranches, FloatArray, SteadyState
from src.services.linearized_dynamics import drift_matrix, is_stable, optical_spring_constant
from src.services.parameter_service import derive_detunings

logger = get_logger(__name__)


def _qubit_pull(params: SystemParams, delta2: float) -> complex:
    """g^2*<sigma_z>/(gamma_a + i*delta2), the qubit's contribution to the cavity self-energy."""
    return params.g_qubit**2 * params.sigma_z_ss / (params.gamma_qubit + 1j * delta2)


def intensity_cubic(params: SystemParams, drive: DriveConfig) -> FloatArray:
    """
    Coefficients (highest power first) of the self-consistency cubic in x = |C0|^2.

        kappa0^2 x^3 - 2 b kappa0 x^2 + (a^2 + b^2) x - Omega^2 = 0

    with a = gamma_c - Re G, b = delta1 - Im G and G the qubit pull.
    """
    detunings = derive_detunings(params, drive)
    pull = _qubit_pull(params, detunings.delta2)
    a = params.gamma_cavity - pull.real
    b = detunings.delta1 - pull.imag
    kappa0 = optical_spring_constant(params)
    return np.array([kappa0**2, -2.0 * b * kappa0, a**2 + b**2, -drive.big_omega**2])


def _real_roots(coeffs: FloatArray) -> list[float]:
    """Positive real roots of the cubic, ascending, each polished by one Newton step."""
    lead = np.flatnonzero(coeffs)
    if lead.size == 0:
        return []
    # Rescale x by the linear-regime solution so the coefficients are O(1)
    linear, constant = coeffs[2], coeffs[3]
    if linear > 0:
        scale = -constant / linear
    elif coeffs[0] > 0:
        scale = float(np.cbrt(-constant / coeffs[0]))
    else:
        raise DegenerateParameterError(
            "No steady state: zero effective cavity damping at resonance without radiation pressure",
            details={"coefficients": coeffs.tolist()},
        )
    scaled = coeffs * np.array([scale**3, scale**2, scale, 1.0])
    roots = np.roots(scaled)

    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    found: list[float] = []
    for root in roots:
        if abs(root.imag) > settings.root_imag_tol * max(1.0, abs(root)):
            continue
        x = float(root.real) * scale
        if x <= 0:
            continue
        slope = dpoly(x)
        if slope != 0:
            x -= poly(x) / slope
        found.append(x)
    return sorted(found)


def _assemble(
    x: float, params: SystemParams, drive: DriveConfig
) -> tuple[complex, float, float, complex, float]:
    """c0, q0, delta3, l0 and the relative residual for intensity x."""
    detunings = derive_detunings(params, drive)
    pull = _qubit_pull(params, detunings.delta2)
    kappa0 = optical_spring_constant(params)

    delta3 = detunings.delta1 - kappa0 * x
    c0 = drive.big_omega / (params.gamma_cavity + 1j * delta3 - pull)
    intensity = abs(c0) ** 2

    # Recompute delta3 from the returned amplitude before checking consistency
    delta3 = detunings.delta1 - kappa0 * intensity
    residual = abs((params.gamma_cavity + 1j * delta3 - pull) * c0 - drive.big_omega) / drive.big_omega
    q0 = params.chi * intensity / (params.mass * params.omega_mech**2)
    l0 = 1j * params.g_qubit * params.sigma_z_ss * c0 / (params.gamma_qubit + 1j * detunings.delta2)
    return c0, q0, delta3, l0, residual


def _branch_stability(x: float, params: SystemParams, drive: DriveConfig) -> bool:
    c0, _, delta3, _, _ = _assemble(x, params, drive)
    return is_stable(drift_matrix(c0, delta3, params, derive_detunings(params, drive)))


def _select(stability: Sequence[bool]) -> int:
    """Lowest stable branch, or the lowest branch when none is stable."""
    for index, stable in enumerate(stability):
        if stable:
            return index
    return 0


def solve_steady_state(params: SystemParams, drive: DriveConfig) -> SteadyState:
    """
    Solve the probe-off steady state on the lowest stable branch.

    Args:
        params: System parameters
        drive: Drive configuration (epsilon is ignored)

    Returns:
        SteadyState with diagnostics for ambiguous or unstable branches

    Raises:
        ConvergenceError: If the polished root fails the residual check
        DegenerateParameterError: If no steady state exists
    """
    detunings = derive_detunings(params, drive)

    if drive.big_omega == 0:
        a = drift_matrix(0j, detunings.delta1, params, detunings)
        return SteadyState(
            c0=0j,
            q0=0.0,
            p0=0.0,
            l0=0j,
            delta3=detunings.delta1,
            residual=0.0,
            n_branches=1,
            selected_index=0,
            stable=is_stable(a),
        )

    roots = _real_roots(intensity_cubic(params, drive))
    if not roots:
        raise ConvergenceError(
            "Steady-state cubic has no positive real root",
            details={"coefficients": intensity_cubic(params, drive).tolist()},
        )

    stability = [_branch_stability(x, params, drive) for x in roots]
    index = _select(stability)
    c0, q0, delta3, l0, residual = _assemble(roots[index], params, drive)

    if residual > settings.steady_residual_tol:
        raise ConvergenceError(
            f"Steady-state residual {residual:.3e} exceeds {settings.steady_residual_tol:.1e}",
            details={"residual": residual, "intensity": roots[index]},
        )

    diagnostics: list[Diagnostic] = []
    if len(roots) > 1:
        diagnostics.append(
            Diagnostic(
                severity=Severity.WARNING,
                field="big_omega",
                message=(
                    f"ambiguous branch: {len(roots)} real intensities "
                    f"{', '.join(f'{x:.6g}' for x in roots)}; selected index {index}"
                ),
            )
        )
    if not stability[index]:
        diagnostics.append(
            Diagnostic(
                severity=Severity.WARNING,
                field="big_omega",
                message="no stable branch; returning the lowest-intensity root (unstable)",
            )
        )
    for d in diagnostics:
        logger.warning(f"Steady state: {d.message}")

    logger.debug(
        f"Steady state |c0|^2={roots[index]:.6g} delta3={delta3:.6g} residual={residual:.2e}"
    )
    return SteadyState(
        c0=complex(c0),
        q0=float(q0),
        p0=0.0,
        l0=complex(l0),
        delta3=float(delta3),
        residual=float(residual),
        n_branches=len(roots),
        selected_index=index,
        stable=stability[index],
        diagnostics=tuple(diagnostics),
    )


def bistability_scan(
    params: SystemParams,
    drive: DriveConfig,
    omega_drive_range: Sequence[float],
    threads: int | None = None,
) -> list[BistabilityBranches]:
    """
    All real intensity roots and their stability across drive frequencies.

    Args:
        params: System parameters
        drive: Drive configuration; omega_drive is replaced by each scan value
        omega_drive_range: Drive frequencies (rad/s), nonempty
        threads: Worker threads

    Returns:
        One BistabilityBranches per drive frequency, in input order
    """
    values = list(omega_drive_range)
    if not values:
        raise ValidationError("omega_drive_range must be nonempty")

    def scan_point(omega_drive: float) -> BistabilityBranches:
        point_drive = drive.model_copy(update={"omega_drive": omega_drive})
        if point_drive.big_omega == 0:
            return BistabilityBranches(omega_drive, (0.0,), (True,), 0)
        roots = _real_roots(intensity_cubic(params, point_drive))
        flags = tuple(_branch_stability(x, params, point_drive) for x in roots)
        return BistabilityBranches(
            omega_drive=omega_drive,
            intensities=tuple(roots),
            stability_flags=flags,
            selected_index=_select(flags),
        )

    logger.info(f"Bistability scan over {len(values)} drive frequencies")
    return parallel_map(scan_point, values, threads)
