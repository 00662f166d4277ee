"""Adaptive spectral quadrature for the y-integrals.

The kernels are sharply peaked near the poles of the fluctuation response,
with widths spanning many decades (mechanical damping against cavity decay).
The core interval is split at breakpoints graded geometrically around every
pole so each Gauss-Kronrod panel sees a smooth integrand; the two tails are
integrated separately on semi-infinite intervals.
"""

from collections.abc import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec, trapezoid

from src.lib.config import settings
from src.lib.exceptions import QuadratureError
from src.lib.logger import get_logger
from src.models.results import ComplexArray, FloatArray, SpectralKernels, YIntegrals

logger = get_logger(__name__)

TWO_PI = 2.0 * np.pi

# Geometric grading of breakpoints around each pole: Re(p) +- h*|Im p|*5^k
_GRADING_BASE = 5.0
_GRADING_LEVELS = 11

# Kernel evaluations per vectorized call in the dense-grid reference
_DENSE_CHUNK = 65536

QuadFn = Callable[[float], FloatArray]


def panel_breakpoints(kernels: SpectralKernels) -> FloatArray:
    """Sorted breakpoints strictly inside (-cutoff, cutoff)."""
    cutoff = kernels.cutoff
    points: list[float] = [float(a) for a in kernels.anchors]
    for pole in kernels.poles:
        center, width = float(pole.real), abs(float(pole.imag))
        points.append(center)
        if width == 0:
            continue
        for k in range(_GRADING_LEVELS):
            offset = settings.quad_half_widths * width * _GRADING_BASE**k
            points.extend((center - offset, center + offset))
    arr = np.unique(np.asarray(points, dtype=float))
    return arr[(arr > -cutoff) & (arr < cutoff)]


def _integrate(
    fn: QuadFn, epsabs: float, epsrel: float, breakpoints: FloatArray, cutoff: float
) -> tuple[FloatArray, float]:
    """
    Integrate fn over the real line as core plus two tails.

    With epsabs = 0 the tails get an absolute tolerance relative to the core value.
    """
    pieces = (
        (-cutoff, cutoff, breakpoints.tolist()),
        (cutoff, np.inf, None),
        (-np.inf, -cutoff, None),
    )
    tolerance = epsabs
    parts: list[FloatArray] = []
    error = 0.0
    for a, b, points in pieces:
        value, err, info = quad_vec(
            fn,
            a,
            b,
            epsabs=tolerance,
            epsrel=epsrel,
            norm="max",
            limit=settings.quad_limit,
            points=points,
            full_output=True,
        )
        if info.status != 0:
            raise QuadratureError(
                f"quad_vec on [{a:.3g}, {b:.3g}] stopped early: {info.message}",
                details={"status": int(info.status), "error": float(err)},
            )
        parts.append(np.atleast_1d(np.asarray(value, dtype=float)))
        error += float(err)
        if tolerance == 0:
            tolerance = epsrel * float(np.max(np.abs(parts[0])))
    return np.sum(parts, axis=0), error


def y14_integral(kernels: SpectralKernels) -> tuple[float, float]:
    """
    y14 = (1/2 pi) * integral of Y14 over the real line.

    Returns:
        (y14, absolute error estimate)

    Raises:
        QuadratureError: If the adaptive integration does not converge
    """
    if kernels.vanishing:
        return 0.0, 0.0

    def integrand(omega: float) -> FloatArray:
        return np.real(kernels.y14_kernel(np.array([omega])))

    value, error = _integrate(
        integrand, 0.0, settings.quad_rel_tol, panel_breakpoints(kernels), kernels.cutoff
    )
    y14 = float(value[0]) / TWO_PI
    logger.debug(f"y14 = {y14:.6e} (+- {error / TWO_PI:.1e})")
    return y14, error / TWO_PI


def y_integrals_block(
    kernels: SpectralKernels,
    taus: Sequence[float],
    y14: float,
    y14_error: float = 0.0,
) -> list[YIntegrals]:
    """
    y12(tau) and y13(tau) for a block of delays from one vector-valued quadrature.

    y12(tau) = (1/2 pi) * integral of Y12(w) e^{-i w tau}
    y13(tau) = (1/2 pi) * integral of Y13(w) e^{+i w tau}

    Each node evaluates the kernels once and feeds every delay in the block.
    The absolute tolerance is tied to y14, the scale g2 is normalized by.

    Raises:
        QuadratureError: If the combined error exceeds quad_fail_tol relative to y14
    """
    tau_arr = np.asarray(list(taus), dtype=float)
    if kernels.vanishing or y14 <= 0:
        return [YIntegrals(float(t), 0j, 0j, y14, 0.0, y14_error) for t in tau_arr]

    n = tau_arr.size

    def integrand(omega: float) -> FloatArray:
        y12, y13 = kernels.joint_kernel(np.array([omega]))
        phase = np.exp(-1j * omega * tau_arr)
        forward: ComplexArray = y12[0] * phase
        backward: ComplexArray = y13[0] * np.conj(phase)
        return np.concatenate([forward.real, forward.imag, backward.real, backward.imag])

    scale = TWO_PI * y14
    values, error = _integrate(
        integrand,
        settings.quad_rel_tol * scale,
        settings.quad_rel_tol,
        panel_breakpoints(kernels),
        kernels.cutoff,
    )
    if error > settings.quad_fail_tol * scale:
        raise QuadratureError(
            f"y-integral error {error:.3e} exceeds {settings.quad_fail_tol:.1e} of 2*pi*y14",
            details={"error": error, "scale": scale, "taus": tau_arr.tolist()},
        )

    values = values / TWO_PI
    y12_vals = values[:n] + 1j * values[n : 2 * n]
    y13_vals = values[2 * n : 3 * n] + 1j * values[3 * n :]
    return [
        YIntegrals(
            tau=float(tau_arr[i]),
            y12=complex(y12_vals[i]),
            y13=complex(y13_vals[i]),
            y14=y14,
            error=error / TWO_PI,
            y14_error=y14_error,
        )
        for i in range(n)
    ]


def y_integrals(
    kernels: SpectralKernels,
    tau: float,
    y14: float | None = None,
    y14_error: float | None = None,
) -> YIntegrals:
    """y12, y13 and y14 at a single delay; y14 is computed when not supplied."""
    if y14 is None:
        y14, y14_error = y14_integral(kernels)
    return y_integrals_block(kernels, [tau], y14, y14_error or 0.0)[0]


def _dense_grid(kernels: SpectralKernels, npoints: int) -> FloatArray:
    """Uniform core grid plus log-spaced offsets on both sides of every pole."""
    cutoff = kernels.cutoff
    centers = np.unique(np.round(kernels.poles.real, 6))
    widths = np.array(
        [min(abs(p.imag) for p in kernels.poles if np.round(p.real, 6) == c) for c in centers]
    )
    per_side = max(16, (3 * npoints // 4) // max(1, 2 * centers.size))
    parts = [np.linspace(-cutoff, cutoff, max(2, npoints // 4)), centers]
    for center, width in zip(centers, widths):
        w = max(width, cutoff * 1e-15)
        offsets = w * np.geomspace(1e-3, max(cutoff / w, 1e-2), per_side)
        parts.extend((center - offsets, center + offsets))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= -cutoff) & (grid <= cutoff)]


def dense_grid_reference(
    kernels: SpectralKernels, tau: float = 0.0, npoints: int | None = None
) -> YIntegrals:
    """
    Trapezoid-rule y-integrals on a pole-refined grid over the core interval.

    An independent check on the adaptive quadrature; the tails beyond the
    cutoff are dropped and no error estimate is produced.
    """
    grid = _dense_grid(kernels, npoints or settings.dense_grid_points)
    logger.debug(f"Dense-grid reference on {grid.size} nodes")

    y12 = np.empty(grid.size, dtype=complex)
    y13 = np.empty(grid.size, dtype=complex)
    for start in range(0, grid.size, _DENSE_CHUNK):
        chunk = grid[start : start + _DENSE_CHUNK]
        y12[start : start + chunk.size], y13[start : start + chunk.size] = kernels.joint_kernel(chunk)

    phase = np.exp(-1j * grid * tau)
    return YIntegrals(
        tau=float(tau),
        y12=complex(trapezoid(y12 * phase, grid) / TWO_PI),
        y13=complex(trapezoid(y13 * np.conj(phase), grid) / TWO_PI),
        y14=float(trapezoid(y13.real, grid) / TWO_PI),
        error=float("nan"),
        y14_error=float("nan"),
    )
