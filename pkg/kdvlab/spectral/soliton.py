"""
Soliton Family
psi_c(y) = (3c/2) sech^2(sqrt(c) y / 2), its y- and c-derivatives, and the
weighted profiles e^{alpha y} * (...) evaluated without forming e^{alpha y}

All derivatives are closed forms. Spectral differentiation is only used to
cross-check them.
"""

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField

from kdvlab.core.errors import ParameterError
from kdvlab.spectral.grid import Field, Grid1D, inner, l2_norm, spectral_derivative


class SolitonParams(BaseModel):
    """Speed c and offset x0 of the soliton psi_c(x - x0)"""

    model_config = ConfigDict(frozen=True)

    speed: float = PydanticField(gt=0.0)
    offset: float = 0.0


def _check_speed(c: float):
    if not c > 0:
        raise ParameterError(f"soliton speed must be positive, got {c}")


# --- array-level closed forms -------------------------------------------------

def weighted_sech2(y: np.ndarray, b: float, alpha: float = 0.0) -> np.ndarray:
    """e^{alpha y} sech^2(b y), written as 4 e^{alpha y - 2b|y|} / (1 + e^{-2b|y|})^2"""
    decay = np.exp(-2.0 * b * np.abs(y))
    return 4.0 * np.exp(alpha * y - 2.0 * b * np.abs(y)) / (1.0 + decay) ** 2


def weighted_one_plus_tanh(y: np.ndarray, b: float, alpha: float = 0.0) -> np.ndarray:
    """e^{alpha y} (1 + tanh(b y)) without overflow on either side"""
    decay = np.exp(-2.0 * b * np.abs(y))
    return 2.0 * np.exp(alpha * y + 2.0 * b * np.minimum(y, 0.0)) / (1.0 + decay)


def profile_values(kind: str, c: float, y: np.ndarray, weight: float = 0.0) -> np.ndarray:
    """
    Sample e^{weight y} * profile(y) for one of the soliton profiles

    Args:
        kind: "psi", "dpsi_dy", "dpsi_dc" or "int_dpsi_dc" (the running integral
            of dpsi_dc from -infinity)
        c: soliton speed
        y: co-moving coordinates
        weight: exponent of the weight e^{weight y}

    Returns:
        Array of samples
    """
    _check_speed(c)
    b = np.sqrt(c) / 2.0
    s = weighted_sech2(y, b, weight)
    if kind == "psi":
        return 1.5 * c * s
    if kind == "dpsi_dy":
        return -3.0 * c * b * s * np.tanh(b * y)
    if kind == "dpsi_dc":
        return 1.5 * s - 0.75 * np.sqrt(c) * y * s * np.tanh(b * y)
    if kind == "int_dpsi_dc":
        return 1.5 / np.sqrt(c) * weighted_one_plus_tanh(y, b, weight) + 0.75 * y * s
    raise ValueError(f"unknown soliton profile '{kind}'")


# --- fields ------------------------------------------------------------------

def weighted_profile(kind: str, p: SolitonParams, grid: Grid1D, weight: float = 0.0) -> Field:
    """e^{weight y} * profile sampled on the grid, y measured from the offset"""
    y = grid.points - p.offset
    return Field(grid, profile_values(kind, p.speed, y, weight))


def psi(p: SolitonParams, grid: Grid1D) -> Field:
    """
    Sample (3c/2) sech^2((sqrt(c)/2)(x - x0))

    Args:
        p: soliton parameters
        grid: grid wide enough for the profile to vanish at the ends

    Returns:
        Field of soliton samples
    """
    field = weighted_profile("psi", p, grid)
    peak = 1.5 * p.speed
    if max(abs(field.values[0]), abs(field.values[-1])) > 1e-12 * peak:
        logger.warning(f"Soliton c={p.speed} not decayed at the grid ends (L={grid.half_length:.3f})")
    return field


def dpsi_dy(p: SolitonParams, grid: Grid1D) -> Field:
    return weighted_profile("dpsi_dy", p, grid)


def dpsi_dc(p: SolitonParams, grid: Grid1D) -> Field:
    return weighted_profile("dpsi_dc", p, grid)


def int_dpsi_dc(p: SolitonParams, grid: Grid1D) -> Field:
    """Closed-form running integral of dpsi_dc from -infinity"""
    return weighted_profile("int_dpsi_dc", p, grid)


def travelling_soliton(p: SolitonParams, grid: Grid1D, t: float) -> Field:
    """Exact KdV solution psi_c(x - ct - x0) at time t"""
    return psi(SolitonParams(speed=p.speed, offset=p.offset + p.speed * t), grid)


def profile_residual(f: Field, c: float) -> float:
    """Discrete L2 norm of -c f' + f''' + (f^2)' assembled spectrally"""
    residual = -c * spectral_derivative(f, 1) + spectral_derivative(f, 3) + spectral_derivative(f * f, 1)
    return l2_norm(residual)


def soliton_residual(p: SolitonParams, grid: Grid1D) -> float:
    """Residual of the travelling-wave ODE for the sampled soliton"""
    return profile_residual(psi(p, grid), p.speed)


def mass(u: Field) -> float:
    return float(u.grid.spacing * np.sum(u.values))


def momentum(u: Field) -> float:
    return inner(u, u)


def lyapunov_functional(u: Field, c0: float) -> float:
    """E[u] = int 1/2 u_x^2 - 1/3 u^3 + 1/2 c0 u^2"""
    ux = spectral_derivative(u, 1)
    density = 0.5 * ux.values**2 - u.values**3 / 3.0 + 0.5 * c0 * u.values**2
    return float(u.grid.spacing * np.sum(density))


