"""
Weighted Linearized Operator
A_a = e^{ay} d_y (-d_y^2 + c - 2 psi_c) e^{-ay}, its generalized kernel, the
biorthogonal adjoint eigenfunctions, the projections P and Q and a dense
discretization for spectrum studies

The weight is never materialized: every conjugation goes through
e^{ay} d_y e^{-ay} = d_y - a, and weighted soliton profiles are sampled from
overflow-free closed forms.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField, model_validator
from scipy import linalg, optimize

from kdvlab.core.config import settings
from kdvlab.core.errors import EigensolverError, SingularSystemError
from kdvlab.spectral.grid import (
    Field,
    Grid1D,
    cumulative_integral,
    derivative_symbol,
    inner,
    l2_norm,
    shifted_antiderivative,
    shifted_derivative,
    spectral_derivative,
    symbol_multiply,
)
from kdvlab.spectral.soliton import SolitonParams, psi, weighted_profile

# Biorthogonality solve is rejected above this condition number
THETA_CONDITION_LIMIT = 1e8


class WeightParams(BaseModel):
    """
    Weight a and speed c of the linearization

    a = 0 is accepted as the unweighted limit; otherwise 0 < a < sqrt(c/3).
    """

    model_config = ConfigDict(frozen=True)

    weight: float = PydanticField(ge=0.0)
    speed: float = PydanticField(gt=0.0)

    @model_validator(mode="after")
    def check_weight_window(self):
        if self.weight >= np.sqrt(self.speed / 3.0):
            raise ValueError(
                f"weight a={self.weight} must stay below sqrt(c/3)={np.sqrt(self.speed / 3.0):.6f}"
            )
        return self

    @property
    def gap(self) -> float:
        """a (c - a^2), the distance of the continuous spectrum from the imaginary axis"""
        return self.weight * (self.speed - self.weight**2)

    @property
    def soliton(self) -> SolitonParams:
        return SolitonParams(speed=self.speed)


class Antiderivative(str, Enum):
    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"


# --- operator application ----------------------------------------------------

def constant_symbol(grid: Grid1D, params: WeightParams) -> np.ndarray:
    """Symbol (i xi - a)(c - (i xi - a)^2) of A_a with the soliton coupling removed"""
    s = derivative_symbol(grid, 1, shift=params.weight)
    return s * (params.speed - s**2)


def apply_Aa(w: Field, params: WeightParams, coupling: bool = True) -> Field:
    """
    Apply (d - a)(-(d - a)^2 + c) w - 2 (d - a)(psi_c w)

    Args:
        w: weighted field
        params: weight and speed
        coupling: include the soliton term (False leaves the constant-coefficient part)

    Returns:
        A_a w assembled spectrally
    """
    result = symbol_multiply(w, constant_symbol(w.grid, params))
    if coupling:
        result = result - 2.0 * shifted_derivative(psi(params.soliton, w.grid) * w, params.weight)
    return result


def apply_Aa_adjoint(v: Field, params: WeightParams) -> Field:
    """Formal L2 adjoint: -(c - (d + a)^2)(d + a) v + 2 psi_c (d + a) v"""
    a, c = params.weight, params.speed
    dv = shifted_derivative(v, -a)
    return -(c * dv - shifted_derivative(dv, -a, order=2)) + 2.0 * psi(params.soliton, v.grid) * dv


def h1_dissipation(w: Field, params: WeightParams) -> float:
    """<w, A_a w>_{H^1}; negative when the weighted flow dissipates the H^1 norm"""
    aw = apply_Aa(w, params)
    return inner(w, aw) + inner(spectral_derivative(w, 1), spectral_derivative(aw, 1))


def continuous_spectrum_curve(tau, params: WeightParams):
    """i tau^3 - 3a tau^2 + (c - 3a^2) i tau - a (c - a^2); accepts scalars or arrays"""
    a, c = params.weight, params.speed
    tau = np.asarray(tau, dtype=float)
    value = 1j * tau**3 - 3.0 * a * tau**2 + 1j * (c - 3.0 * a**2) * tau - a * (c - a**2)
    return complex(value) if value.ndim == 0 else value


def curve_distance(lam: complex, params: WeightParams) -> float:
    """Euclidean distance from lam to the continuous-spectrum curve"""
    c_eff = params.speed - 3.0 * params.weight**2
    roots = np.roots([1.0, 0.0, c_eff, -lam.imag])
    starts = roots[np.abs(roots.imag) < 1e-9].real
    if starts.size == 0:
        starts = roots.real

    def distance(tau: float) -> float:
        return abs(continuous_spectrum_curve(tau, params) - lam)

    best = min(starts, key=distance)
    refined = optimize.minimize_scalar(distance, bounds=(best - 1.0, best + 1.0), method="bounded",
                                       options={"xatol": 1e-12})
    return float(min(distance(best), refined.fun))


# --- spectral package -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralPackage:
    """
    Kernel functions zeta_i, adjoint functions eta_i and their constants

    eta_tilde_i = e^{ay} eta_i are kept unweighted so that <e^{ay} f, eta_i>
    can be evaluated as int f eta_tilde_i without forming the weight.
    """

    params: WeightParams
    grid: Grid1D
    zeta1: Field
    zeta2: Field
    eta1: Field
    eta2: Field
    eta1_tilde: Field
    eta2_tilde: Field
    theta1: float
    theta2: float
    theta3: float
    kappa: float
    condition_number: float

    @property
    def zetas(self) -> tuple[Field, Field]:
        return self.zeta1, self.zeta2

    @property
    def etas(self) -> tuple[Field, Field]:
        return self.eta1, self.eta2

    def gram(self) -> np.ndarray:
        """Matrix <zeta_j, eta_k>"""
        return np.array([[inner(z, e) for e in self.etas] for z in self.zetas])

    def coefficients(self, w: Field) -> np.ndarray:
        """(<w, eta_1>, <w, eta_2>)"""
        return np.array([inner(w, self.eta1), inner(w, self.eta2)])


def build_spectral_package(
    params: WeightParams,
    grid: Grid1D,
    antiderivative: Antiderivative = Antiderivative.CLOSED_FORM,
) -> SpectralPackage:
    """
    Construct zeta_1, zeta_2, eta_1, eta_2 and solve for the biorthogonality constants

    Args:
        params: weight and speed
        grid: grid on which the weighted profiles decay at the ends
        antiderivative: how d_y^{-1} d_c psi_c is evaluated

    Returns:
        SpectralPackage with <zeta_j, eta_k> = delta_jk

    Raises:
        SingularSystemError: the 2x2 system for (theta_1, theta_2) is singular
    """
    a = params.weight
    sol = params.soliton

    dcpsi = weighted_profile("dpsi_dc", sol, grid)
    profile = weighted_profile("psi", sol, grid)

    if antiderivative == Antiderivative.CLOSED_FORM:
        primitive = weighted_profile("int_dpsi_dc", sol, grid)
        primitive_weighted = weighted_profile("int_dpsi_dc", sol, grid, weight=-a)
    else:
        primitive = cumulative_integral(dcpsi)
        if a > 0:
            primitive_weighted = shifted_antiderivative(weighted_profile("dpsi_dc", sol, grid, weight=-a), a)
        else:
            primitive_weighted = primitive

    zeta1 = weighted_profile("dpsi_dy", sol, grid, weight=a)
    zeta2 = weighted_profile("dpsi_dc", sol, grid, weight=a)
    profile_weighted = weighted_profile("psi", sol, grid, weight=-a)

    # weighted pairs, so that <zeta_j, eta_k> = delta_jk holds on the grid
    system = np.array([
        [inner(zeta1, primitive_weighted), inner(zeta1, profile_weighted)],
        [inner(zeta2, primitive_weighted), inner(zeta2, profile_weighted)],
    ])
    condition = float(np.linalg.cond(system))
    logger.debug(f"Biorthogonality system for a={a}, c={params.speed}: cond={condition:.3e}")
    if not np.isfinite(condition) or condition > THETA_CONDITION_LIMIT:
        raise SingularSystemError("Biorthogonality system for (theta1, theta2) is singular", condition)
    theta1, theta2 = np.linalg.solve(system, np.array([1.0, 0.0]))

    norm22 = inner(zeta2, profile_weighted)
    if abs(norm22) < 1e-14:
        raise SingularSystemError("<d_c psi, psi> vanishes", np.inf)
    theta3 = 1.0 / norm22

    eta1 = theta1 * primitive_weighted + theta2 * profile_weighted
    eta2 = theta3 * profile_weighted

    tail = max(abs(eta1.values[-1]), abs(eta1.values[0])) / np.max(np.abs(eta1.values))
    if a > 0 and tail > 1e-6:
        logger.warning(f"eta1 does not vanish at the grid ends (tail {tail:.2e}); consider a wider grid")

    kappa = kernel_coupling(zeta1, zeta2, params)[0]
    logger.debug(
        f"Spectral package built: a={a}, c={params.speed}, N={grid.n_points}, "
        f"theta=({theta1:.6g}, {theta2:.6g}, {theta3:.6g}), kappa={kappa:.6g}"
    )
    return SpectralPackage(
        params=params,
        grid=grid,
        zeta1=zeta1,
        zeta2=zeta2,
        eta1=eta1,
        eta2=eta2,
        eta1_tilde=theta1 * primitive + theta2 * profile,
        eta2_tilde=theta3 * profile,
        theta1=float(theta1),
        theta2=float(theta2),
        theta3=float(theta3),
        kappa=kappa,
        condition_number=condition,
    )


def kernel_coupling(zeta1: Field, zeta2: Field, params: WeightParams) -> tuple[float, float]:
    """
    Least-squares coefficient k of A_a zeta_2 = k zeta_1 and the relative residual

    Returns:
        (k, ||A_a zeta_2 - k zeta_1|| / ||A_a zeta_2||)
    """
    image = apply_Aa(zeta2, params)
    k = inner(image, zeta1) / inner(zeta1, zeta1)
    residual = l2_norm(image - k * zeta1) / max(l2_norm(image), 1e-300)
    return float(k), float(residual)


def project_P(w: Field, pkg: SpectralPackage) -> Field:
    """Rank-two projection sum_i <w, eta_i> zeta_i"""
    b1, b2 = pkg.coefficients(w)
    return b1 * pkg.zeta1 + b2 * pkg.zeta2


def project_Q(w: Field, pkg: SpectralPackage) -> Field:
    return w - project_P(w, pkg)


# --- dense spectrum ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Eigenvalues sorted by real part (descending) with per-eigenvalue flags"""

    params: WeightParams
    grid: Grid1D
    eigenvalues: np.ndarray
    boundary_mass: np.ndarray
    is_kernel: np.ndarray
    is_artifact: np.ndarray

    @property
    def kernel_count(self) -> int:
        return int(np.sum(self.is_kernel))

    @property
    def max_real_part(self) -> float:
        """Largest real part outside the kernel"""
        rest = self.eigenvalues[~self.is_kernel]
        return float(np.max(rest.real)) if rest.size else float("-inf")

    @property
    def spectral_gap(self) -> float:
        return -self.max_real_part

    def curve_distances(self) -> np.ndarray:
        """Distance to the continuous-spectrum curve for every eigenvalue outside the kernel and the artifacts"""
        keep = ~self.is_kernel & ~self.is_artifact
        return np.array([curve_distance(lam, self.params) for lam in self.eigenvalues[keep]])


def operator_matrix(params: WeightParams, grid: Grid1D) -> np.ndarray:
    """
    Dense Fourier-space matrix of A_a

    diag(constant symbol) - 2 diag(i xi - a) C, with C the circulant
    C_kl = psi_hat[k - l] / N representing multiplication by psi_c.
    """
    n = grid.n_points
    psi_hat = np.fft.fft(psi(params.soliton, grid).values)
    index = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    circulant = psi_hat[index] / n
    s = derivative_symbol(grid, 1, shift=params.weight)
    return np.diag(constant_symbol(grid, params)) - 2.0 * s[:, None] * circulant


def discretized_spectrum(
    params: WeightParams,
    grid: Grid1D,
    kernel_threshold: Optional[float] = None,
    artifact_mass: Optional[float] = None,
) -> SpectrumResult:
    """
    All eigenvalues of the dense discretization of A_a

    Eigenvectors carrying more than `artifact_mass` of their L2 mass in the
    outer tenth of the window (|y| >= 0.9 L) are flagged as truncation
    artifacts. A plane wave keeps about 0.1 there, so the default of 0.5
    only catches modes pinned to the window edge.

    Args:
        params: weight and speed
        grid: grid with N <= 2048
        kernel_threshold: |lambda| below which an eigenvalue counts as kernel
        artifact_mass: boundary mass fraction above which a mode is an artifact

    Returns:
        SpectrumResult

    Raises:
        EigensolverError: the dense eigensolve failed
    """
    kernel_threshold = settings.KERNEL_THRESHOLD if kernel_threshold is None else kernel_threshold
    artifact_mass = settings.ARTIFACT_BOUNDARY_MASS if artifact_mass is None else artifact_mass
    if grid.n_points > 2048:
        logger.warning(f"Dense eigensolve with N={grid.n_points} will be slow")

    matrix = operator_matrix(params, grid)
    try:
        eigenvalues, vectors = linalg.eig(matrix)
    except (linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"Dense eigensolve failed for a={params.weight}, c={params.speed}: {e}") from e
    if not np.all(np.isfinite(eigenvalues)):
        raise EigensolverError("Eigensolver returned non-finite eigenvalues")

    physical = np.fft.ifft(vectors, axis=0)
    weights = np.abs(physical) ** 2
    outer = np.abs(grid.points) >= 0.9 * grid.half_length
    boundary_mass = weights[outer].sum(axis=0) / weights.sum(axis=0)

    order = np.argsort(-eigenvalues.real, kind="stable")
    eigenvalues = eigenvalues[order]
    boundary_mass = boundary_mass[order]
    result = SpectrumResult(
        params=params,
        grid=grid,
        eigenvalues=eigenvalues,
        boundary_mass=boundary_mass,
        is_kernel=np.abs(eigenvalues) < kernel_threshold,
        is_artifact=boundary_mass > artifact_mass,
    )
    logger.info(
        f"Spectrum a={params.weight}, c={params.speed}, N={grid.n_points}: "
        f"{result.kernel_count} kernel eigenvalues, max Re outside kernel {result.max_real_part:.4f} "
        f"(gap reference {-params.gap:.4f})"
    )
    return result
