"""Closed-form y-integrals from the pole expansion of the output transfer functions.

With A = V diag(lambda) V^-1 the drift matrix, every output coefficient is a
rational function of omega with poles p_k = i*lambda_k in the lower half plane:

    B_j(w) = -delta_j1 + sum_k beta_jk / (w - p_k)

Products and reflections of such functions stay rational, so the kernel
parts without N(omega) transform by residues. The noise spectrum is a ramp
on omega > 0 at T = 0, whose half-line transform reduces to exponential
integrals; at T > 0 its poles at the Matsubara frequencies -i*pi*n/beta add
a sum that converges like exp(-pi*n*tau/beta).

Every kernel decays at least like 1/omega^2, so the residues of each
rational part sum to zero and the tau -> 0 limit is continuous.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import mpmath
import numpy as np
import numpy.typing as npt

from src.lib.config import settings
from src.lib.exceptions import QuadratureError, SingularSystemError
from src.lib.logger import get_logger
from src.models.params import CONSTANTS, Detunings, DriveConfig, NoiseModel, SystemParams
from src.models.results import ComplexArray, SteadyState, YIntegrals
from src.services.linearized_dynamics import C, drift_matrix, input_matrix
from src.services.parameter_service import derive_detunings

logger = get_logger(__name__)

# Relative roundoff attached to every summed term
_ROUNDOFF = 64.0 * float(np.finfo(float).eps)

# Matsubara terms are dropped once exp(-pi*n*tau/beta) falls below exp(-_MATSUBARA_DECAY)
_MATSUBARA_DECAY = 46.0

# A truncated Matsubara sum must reach this multiple of the largest pole
_MATSUBARA_REACH = 1e3


@dataclass(frozen=True)
class PartialFraction:
    """f(w) = constant + sum_k residues[k]/(w - poles[k])."""

    residues: ComplexArray
    poles: ComplexArray
    constant: complex = 0j

    def __call__(self, omega: npt.ArrayLike) -> ComplexArray:
        w = np.atleast_1d(np.asarray(omega, dtype=complex))
        terms = self.residues[None, :] / (w[:, None] - self.poles[None, :])
        return self.constant + terms.sum(axis=1)

    def reflected(self) -> "PartialFraction":
        """f(-w)."""
        return PartialFraction(-self.residues, -self.poles, self.constant)

    def conjugated(self) -> "PartialFraction":
        """conj(f(w)) on the real axis."""
        return PartialFraction(np.conj(self.residues), np.conj(self.poles), self.constant.conjugate())

    def __add__(self, other: "PartialFraction") -> "PartialFraction":
        return PartialFraction(
            np.concatenate([self.residues, other.residues]),
            np.concatenate([self.poles, other.poles]),
            self.constant + other.constant,
        )

    def __mul__(self, other: "PartialFraction") -> "PartialFraction":
        # Pole sets of the two factors must be disjoint
        left = self.residues * other(self.poles)
        right = other.residues * self(other.poles)
        return PartialFraction(
            np.concatenate([left, right]),
            np.concatenate([self.poles, other.poles]),
            self.constant * other.constant,
        )


@dataclass(frozen=True)
class KernelFractions:
    """
    Pole expansions of the y-integrands, arranged for e^{-i w tau} transforms.

    Attributes:
        noise12: B5(-w) B5(w), multiplied by N(w) in Y12
        rational12: B2(-w) B1(w) + B4(-w) B3(w)
        noise13: |B5(-w)|^2, the reflected noise part of Y13
        rational13: |B2(-w)|^2 + |B4(-w)|^2
        noise: Mechanical bath
        condition: Condition number of the eigenvector matrix
    """

    noise12: PartialFraction
    rational12: PartialFraction
    noise13: PartialFraction
    rational13: PartialFraction
    noise: NoiseModel
    condition: float

    @property
    def pole_scale(self) -> float:
        """Largest pole modulus."""
        return float(np.max(np.abs(self.noise12.poles)))


def transfer_fractions(
    steady: SteadyState, params: SystemParams, detunings: Detunings
) -> tuple[tuple[PartialFraction, ...], float]:
    """
    B1..B5 as partial fractions from the eigendecomposition of the drift matrix.

    Returns:
        (B1..B5, condition number of the eigenvector matrix)

    Raises:
        SingularSystemError: If the drift matrix is too close to defective
    """
    a = drift_matrix(steady.c0, steady.delta3, params, detunings)
    eigenvalues, vectors = np.linalg.eig(a)
    condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition) or condition > settings.pole_cond_limit:
        raise SingularSystemError(
            f"Drift matrix eigenvectors ill-conditioned (condition number {condition:.3g})",
            details={"condition_number": condition},
        )
    weights = np.linalg.solve(vectors, input_matrix(params))
    poles = 1j * eigenvalues
    root_c = np.sqrt(2.0 * params.gamma_cavity)
    fractions = tuple(
        PartialFraction(
            residues=root_c * 1j * vectors[C, :] * weights[:, j],
            poles=poles,
            constant=-1.0 + 0j if j == 0 else 0j,
        )
        for j in range(5)
    )
    return fractions, condition


def kernel_fractions(
    steady: SteadyState, params: SystemParams, drive: DriveConfig
) -> KernelFractions:
    """
    Pole expansions of the Y12 and Y13 kernels.

    Raises:
        SingularSystemError: If the drift matrix is too close to defective
    """
    detunings = derive_detunings(params, drive)
    (b1, b2, b3, b4, b5), condition = transfer_fractions(steady, params, detunings)
    noise13 = b5.conjugated() * b5
    rational13 = b2.conjugated() * b2 + b4.conjugated() * b4
    logger.debug(f"Pole expansion: {b1.poles.size} poles, eigenvector condition {condition:.3g}")
    return KernelFractions(
        noise12=b5.reflected() * b5,
        rational12=b2.reflected() * b1 + b4.reflected() * b3,
        noise13=noise13.reflected(),
        rational13=rational13.reflected(),
        noise=NoiseModel.from_params(params, drive),
        condition=condition,
    )


def _rational_transform(fraction: PartialFraction, tau: float) -> tuple[complex, float]:
    """(1/2pi) * integral of f(w) e^{-i w tau} for tau >= 0, closed in the lower half plane."""
    lower = fraction.poles.imag < 0
    terms = fraction.residues[lower] * np.exp(-1j * fraction.poles[lower] * tau)
    return complex(-1j * terms.sum()), float(np.abs(terms).sum())


def _scaled_exp1(z: complex) -> complex:
    """e^z E1(z) on the principal branch; mpmath keeps both factors finite."""
    return complex(mpmath.exp(z) * mpmath.e1(z))


def _ramp_transform(fraction: PartialFraction, tau: float, noise: NoiseModel) -> tuple[complex, float]:
    """
    (1/2pi) * integral of N(w) K(w) e^{-i w tau} at T = 0, where N = 2*hbar*gamma_m*m*w on w > 0.

    With w K(w) = sum rho q/(w - q) the half-line integral of each term is
    e^{-iq tau} E1(-iq tau), less 2*pi*i e^{-iq tau} for poles in the fourth
    quadrant that the rotated contour sweeps over.
    """
    prefactor = CONSTANTS.hbar * noise.gamma_mech * noise.mass / np.pi
    q = fraction.poles
    weights = fraction.residues * q
    if tau == 0:
        terms = -weights * np.log(-q)
    else:
        swept = (q.real > 0) & (q.imag < 0)
        z = -1j * q * tau
        half_line = np.array([_scaled_exp1(complex(v)) for v in z])
        with np.errstate(over="ignore", under="ignore"):
            half_line = half_line - 2j * np.pi * np.where(swept, np.exp(z), 0.0)
        terms = weights * half_line
    return complex(prefactor * terms.sum()), float(prefactor * np.abs(terms).sum())


def _thermal_factor(noise: NoiseModel, omega: ComplexArray) -> ComplexArray:
    """N continued to complex frequencies: hbar*gamma_m*m*w*(1 + coth(hbar*w/(2 k_B T)))."""
    beta = CONSTANTS.hbar / (2.0 * CONSTANTS.k_boltzmann * noise.temperature)
    return CONSTANTS.hbar * noise.gamma_mech * noise.mass * omega * (1.0 + 1.0 / np.tanh(beta * omega))


def _matsubara_count(noise: NoiseModel, tau: float, pole_scale: float) -> int:
    beta = CONSTANTS.hbar / (2.0 * CONSTANTS.k_boltzmann * noise.temperature)
    cap = settings.matsubara_max_terms
    if tau > 0:
        needed = int(np.ceil(_MATSUBARA_DECAY * beta / (np.pi * tau)))
        if needed <= cap:
            return max(needed, 1)
    # Truncated by the cap: the dropped tail is small only far beyond every pole
    reach = np.pi * cap / beta
    if reach < _MATSUBARA_REACH * pole_scale:
        raise QuadratureError(
            f"Matsubara sum at T={noise.temperature:g} K needs more than {cap} terms at tau={tau:.3g} s",
            details={"temperature": noise.temperature, "tau": tau, "cap": cap},
        )
    return cap


def _thermal_transform(
    fraction: PartialFraction, tau: float, noise: NoiseModel, pole_scale: float
) -> tuple[complex, float]:
    """(1/2pi) * integral of N(w) K(w) e^{-i w tau} at T > 0, closed in the lower half plane."""
    lower = fraction.poles.imag < 0
    q = fraction.poles[lower]
    pole_terms = fraction.residues[lower] * _thermal_factor(noise, q) * np.exp(-1j * q * tau)

    beta = CONSTANTS.hbar / (2.0 * CONSTANTS.k_boltzmann * noise.temperature)
    n = np.arange(1, _matsubara_count(noise, tau, pole_scale) + 1)
    matsubara = -1j * np.pi * n / beta
    residue = CONSTANTS.hbar * noise.gamma_mech * noise.mass * matsubara / beta
    with np.errstate(under="ignore"):
        matsubara_terms = residue * fraction(matsubara) * np.exp(-np.pi * n * tau / beta)

    total = pole_terms.sum() + matsubara_terms.sum()
    magnitude = float(np.abs(pole_terms).sum() + np.abs(matsubara_terms).sum())
    return complex(-1j * total), magnitude


def _noise_transform(
    fraction: PartialFraction, tau: float, noise: NoiseModel, pole_scale: float
) -> tuple[complex, float]:
    if noise.temperature == 0:
        return _ramp_transform(fraction, tau, noise)
    return _thermal_transform(fraction, tau, noise, pole_scale)


def y12_y13(fractions: KernelFractions, tau: float) -> tuple[complex, complex, float]:
    """
    y12(tau) and y13(tau) at one delay.

    Returns:
        (y12, y13, absolute roundoff estimate)

    Raises:
        QuadratureError: If the Matsubara sum cannot be truncated
    """
    scale = fractions.pole_scale
    n12, m12 = _noise_transform(fractions.noise12, tau, fractions.noise, scale)
    r12, s12 = _rational_transform(fractions.rational12, tau)
    n13, m13 = _noise_transform(fractions.noise13, tau, fractions.noise, scale)
    r13, s13 = _rational_transform(fractions.rational13, tau)
    error = _ROUNDOFF * (m12 + s12 + m13 + s13)
    return n12 + r12, n13 + r13, error


def y14_value(fractions: KernelFractions) -> tuple[float, float]:
    """
    y14 = y13(0), real by construction.

    Returns:
        (y14, absolute roundoff estimate)
    """
    _, y13, error = y12_y13(fractions, 0.0)
    if abs(y13.imag) > max(error, _ROUNDOFF * abs(y13.real)):
        logger.debug(f"y14 imaginary part {y13.imag:.3e} above roundoff {error:.3e}")
    return float(y13.real), error


def y_integrals(
    fractions: KernelFractions, taus: Sequence[float], y14: float, y14_error: float = 0.0
) -> list[YIntegrals | QuadratureError]:
    """
    y-integrals over a delay grid; a delay whose Matsubara sum fails yields its error instead.
    """
    results: list[YIntegrals | QuadratureError] = []
    for tau in taus:
        try:
            y12, y13, error = y12_y13(fractions, float(tau))
        except QuadratureError as e:
            results.append(e)
            continue
        results.append(YIntegrals(float(tau), y12, y13, y14, error, y14_error))
    return results
