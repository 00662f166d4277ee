"""Result types produced by the numerical services.

Numerical results hold complex scalars and numpy arrays, so they are frozen
dataclasses rather than pydantic models.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np
import numpy.typing as npt

from src.models.params import Diagnostic

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

EForm = Literal["validated", "as_printed"]
AForm = Literal["printed", "flipped"]
YMethod = Literal["poles", "quadrature"]


class ResponseMethod(str, Enum):
    """How a probe response was obtained."""

    CLOSED_FORM = "closed_form"
    LINEAR_SOLVE = "linear_solve"


@dataclass(frozen=True)
class SteadyState:
    """
    Zeroth-order (probe-off) steady state on the selected branch.

    Attributes:
        c0: Cavity amplitude
        q0: Static displacement (m)
        p0: Static momentum, always 0
        l0: Qubit coherence
        delta3: Radiation-pressure shifted cavity detuning (rad/s)
        residual: Relative residual of the self-consistency equation
        n_branches: Number of real intensity roots
        selected_index: Index of the returned root in ascending order
        stable: Whether the returned branch is dynamically stable
        diagnostics: Warnings attached while solving
    """

    c0: complex
    q0: float
    p0: float
    l0: complex
    delta3: float
    residual: float
    n_branches: int = 1
    selected_index: int = 0
    stable: bool = True
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def intensity(self) -> float:
        """Intracavity intensity |c0|^2."""
        return abs(self.c0) ** 2


@dataclass(frozen=True)
class BistabilityBranches:
    """All real intensity roots at one drive frequency."""

    omega_drive: float
    intensities: tuple[float, ...]
    stability_flags: tuple[bool, ...]
    selected_index: int

    @property
    def n_roots(self) -> int:
        return len(self.intensities)


@dataclass(frozen=True)
class LambdaSet:
    """Coefficients of the first-order probe equations at one probe detuning."""

    lambda1: complex
    lambda2: complex
    lambda3: complex
    lambda1_plus: complex
    lambda2_plus: complex
    a_factor: complex
    m_of_delta: complex
    delta3: float


@dataclass(frozen=True)
class ProbeResponse:
    """
    First-order sideband amplitudes and the rescaled output field.

    Attributes:
        c_minus: Amplitude at the probe frequency
        c_plus: Amplitude at the mirrored frequency (nan when not computed)
        eps_out: Rescaled output 2*gamma_c*c_minus/epsilon
        mu_p: Absorption quadrature
        nu_p: Dispersion quadrature
        method: Closed form or linear solve
    """

    c_minus: complex
    c_plus: complex
    eps_out: complex
    mu_p: float
    nu_p: float
    method: ResponseMethod

    @property
    def transmission(self) -> float:
        """|eps_out|^2."""
        return abs(self.eps_out) ** 2

    @property
    def phase(self) -> float:
        """arg(eps_out) in radians."""
        return float(np.angle(self.eps_out))

    @classmethod
    def failed(cls, method: ResponseMethod) -> "ProbeResponse":
        """NaN placeholder for a grid point that could not be computed."""
        nan_c = complex(float("nan"), float("nan"))
        return cls(nan_c, nan_c, nan_c, float("nan"), float("nan"), method)


@dataclass(frozen=True)
class ResponseSweep:
    """
    Probe response over a detuning grid.

    Attributes:
        detuning_grid: Probe detunings (rad/s), strictly increasing
        responses: One response per grid point
        steady: Steady state shared by every point
        omega_mech: Mechanical frequency, for the normalized abscissa
        flags: Per-point failure text ("" when the point succeeded)
        deviation: Relative |closed - solve| per point (nan unless both methods ran)
        alternates: Linear-solve responses when both methods ran
    """

    detuning_grid: FloatArray
    responses: tuple[ProbeResponse, ...]
    steady: SteadyState
    omega_mech: float
    flags: tuple[str, ...]
    deviation: FloatArray
    alternates: tuple[ProbeResponse, ...] = ()

    @property
    def delta_norm(self) -> FloatArray:
        """(delta - omega_m)/omega_m."""
        return (self.detuning_grid - self.omega_mech) / self.omega_mech

    @property
    def mu_p(self) -> FloatArray:
        return np.array([r.mu_p for r in self.responses], dtype=float)

    @property
    def nu_p(self) -> FloatArray:
        return np.array([r.nu_p for r in self.responses], dtype=float)

    @property
    def max_deviation(self) -> float:
        """Largest finite closed-form/linear-solve deviation, nan if none."""
        finite = self.deviation[np.isfinite(self.deviation)]
        return float(finite.max()) if finite.size else float("nan")


@dataclass(frozen=True)
class GainSummary:
    """
    Transparency and gain features of a mu_p curve.

    Attributes:
        max_gain: max(-mu_p), 0 when mu_p never goes negative
        mu_min: Smallest mu_p on the grid
        delta_at_min: Detuning of the smallest mu_p
        zero_crossings: Detunings where mu_p changes sign (linear interpolation)
    """

    max_gain: float
    mu_min: float
    delta_at_min: float
    zero_crossings: tuple[float, ...]


@dataclass(frozen=True)
class EfrstCoeffs:
    """Frequency-dependent coefficients of the fluctuation solution (arrays over omega)."""

    omega: FloatArray
    e_of_omega: ComplexArray
    f_of_omega: ComplexArray
    r_of_omega: ComplexArray
    s_of_omega: ComplexArray
    t_of_omega: ComplexArray
    lambda_upper_1: ComplexArray
    lambda_upper_2: ComplexArray
    lambda_upper_3: ComplexArray
    lambda_upper_1_plus: ComplexArray
    lambda_upper_2_plus: ComplexArray


@dataclass(frozen=True)
class TransferCoeffs:
    """Maps (c_in, c_in^dag, d_in, d_in^dag, xi) to the intracavity fluctuation C(omega)."""

    omega: FloatArray
    c1: ComplexArray
    c2: ComplexArray
    c3: ComplexArray
    c4: ComplexArray
    c5: ComplexArray

    def as_matrix(self) -> ComplexArray:
        """Coefficients stacked as rows, shape (5, len(omega))."""
        return np.vstack([self.c1, self.c2, self.c3, self.c4, self.c5])


@dataclass(frozen=True)
class OutputCoeffs:
    """Output-field coefficients: coherent amplitude b0 and noise transfers b1..b5."""

    omega: FloatArray
    b0: complex
    b1: ComplexArray
    b2: ComplexArray
    b3: ComplexArray
    b4: ComplexArray
    b5: ComplexArray


KernelFn = Callable[[FloatArray], ComplexArray]


@dataclass(frozen=True)
class SpectralKernels:
    """
    Vectorized spectral kernels of the output intensity correlations.

    Attributes:
        y12_kernel: Y12(omega)
        y13_kernel: Y13(omega)
        y14_kernel: Y14(omega), real and nonnegative
        joint_kernel: (Y12, Y13) from one shared coefficient evaluation
        b0: Coherent output amplitude
        poles: Complex poles of the fluctuation response (lower half plane when stable)
        anchors: Extra real-axis feature locations (bare resonances, omega = 0)
        cutoff: Half-width of the core integration interval (rad/s)
        vanishing: True when every kernel is identically zero
    """

    y12_kernel: KernelFn
    y13_kernel: KernelFn
    y14_kernel: KernelFn
    joint_kernel: Callable[[FloatArray], tuple[ComplexArray, ComplexArray]]
    b0: complex
    poles: ComplexArray
    anchors: FloatArray
    cutoff: float
    vanishing: bool = False


@dataclass(frozen=True)
class YIntegrals:
    """The y-integrals at one delay with their quadrature error estimates."""

    tau: float
    y12: complex
    y13: complex
    y14: float
    error: float
    y14_error: float = 0.0


@dataclass(frozen=True)
class PhotonFlux:
    """Mean output photon rate split into coherent and incoherent parts (photons/s)."""

    coherent: float
    incoherent: float

    @property
    def total(self) -> float:
        return self.coherent + self.incoherent


@dataclass(frozen=True)
class CoherenceSeries:
    """
    Second-order coherence of the output field over a delay grid.

    Attributes:
        tau_grid: Delays (s)
        g2_values: g2(tau), nan where the point failed or is undefined
        y14: Delay-independent integral
        y13_of_tau: y13 per delay
        y12_of_tau: y12 per delay
        quadrature_error: Estimated absolute error of each g2 value
        imag_residue: Imaginary part left by the complex evaluation of g2
        b0: Coherent output amplitude
        flags: Per-point failure text
        temperature: Bath temperature (K)
        method: How y12 and y13 were evaluated; "quadrature" after a fallback
    """

    tau_grid: FloatArray
    g2_values: FloatArray
    y14: float
    y13_of_tau: ComplexArray
    y12_of_tau: ComplexArray
    quadrature_error: FloatArray
    imag_residue: FloatArray
    b0: complex
    flags: tuple[str, ...]
    temperature: float = 0.0
    method: YMethod = "poles"

    @property
    def max_abs_deviation(self) -> float:
        """max over tau of |g2 - 1|, ignoring failed points."""
        dev = np.abs(self.g2_values - 1.0)
        dev = dev[np.isfinite(dev)]
        return float(dev.max()) if dev.size else float("nan")

    @property
    def min_g2(self) -> float:
        finite = self.g2_values[np.isfinite(self.g2_values)]
        return float(finite.min()) if finite.size else float("nan")

    @property
    def antibunching_depth(self) -> float:
        """max(0, 1 - min g2)."""
        m = self.min_g2
        return max(0.0, 1.0 - m) if np.isfinite(m) else float("nan")

    @property
    def g2_zero(self) -> float:
        """g2 at tau = 0 when the grid starts there, else nan."""
        if self.tau_grid.size and self.tau_grid[0] == 0.0:
            return float(self.g2_values[0])
        return float("nan")

    @property
    def flux(self) -> PhotonFlux:
        return PhotonFlux(coherent=abs(self.b0) ** 2, incoherent=self.y14)


@dataclass(frozen=True)
class TrendPoint:
    """Nonclassicality measures at one temperature."""

    temperature: float
    max_abs_deviation: float
    min_g2: float
    g2_zero: float


@dataclass(frozen=True)
class TrendReport:
    """Temperature dependence of the nonclassicality measure max|g2 - 1|."""

    points: tuple[TrendPoint, ...]
    non_increasing: bool


@dataclass(frozen=True)
class TrajectoryResult:
    """
    Time-domain mean-field trajectory.

    Attributes:
        time_grid: Sample times (s)
        q_t: Displacement (m)
        p_t: Momentum (kg m/s)
        c_t: Cavity amplitude
        sigma_t: Qubit coherence
        converged: Whether the settle test passed
        settle_time: First time the settle test passed (nan if never)
    """

    time_grid: FloatArray
    q_t: FloatArray
    p_t: FloatArray
    c_t: ComplexArray
    sigma_t: ComplexArray
    converged: bool
    settle_time: float


@dataclass(frozen=True)
class DemodulationResult:
    """Least-squares estimates of the three ansatz amplitudes."""

    c0_est: complex
    c_minus_est: complex
    c_plus_est: complex
    residual_power: float
    ansatz_valid: bool
    beat_periods: int


@dataclass(frozen=True)
class ValidationRow:
    """One cross-check between the frequency-domain and time-domain paths."""

    preset: str
    variant: str
    check: Literal["steady", "response"]
    delta: float
    frequency_domain: float | complex
    time_domain: float | complex
    deviation: float
    passed: bool
    error: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Rows of a validation run."""

    rows: tuple[ValidationRow, ...] = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def max_deviation(self) -> float:
        values = [r.deviation for r in self.rows if np.isfinite(r.deviation)]
        return max(values) if values else float("nan")
