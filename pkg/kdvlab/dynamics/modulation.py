"""
Modulation Tracker
Speed c(t) and phase gamma(t) chosen so that the weighted perturbation has no
component along the generalized kernel (P w = 0)
"""

from typing import Callable, NamedTuple, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField

from kdvlab.core.config import settings
from kdvlab.core.errors import NewtonConvergenceError, ParameterError
from kdvlab.dynamics.forcing import PerturbationModel
from kdvlab.spectral.grid import Field, l2_norm, shift
from kdvlab.spectral.linearized_operator import SpectralPackage, WeightParams, build_spectral_package
from kdvlab.spectral.soliton import profile_values

# Largest a*L for which e^{ay} is formed directly on the initial data
MAX_WEIGHT_EXPONENT = 300.0


class ModulationState(BaseModel):
    """Modulation parameters, their latest rates, the reference speed and the weight"""

    model_config = ConfigDict(frozen=True)

    c: float = PydanticField(gt=0.0)
    gamma: float = 0.0
    cdot: float = 0.0
    gammadot: float = 0.0
    c0: float = PydanticField(gt=0.0)
    a: float = PydanticField(ge=0.0)
    # int_0^t c, the distance travelled by the frame
    position: float = 0.0
    # int_0^t |cdot| plus re-projection jumps, bounds |c - c0|
    speed_variation: float = PydanticField(default=0.0, ge=0.0)


class NewtonResult(NamedTuple):
    x: np.ndarray
    residuals: list[float]
    iterations: int


def damped_newton(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    steps: np.ndarray,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> NewtonResult:
    """
    Newton iteration with central-difference Jacobian and step halving

    The step is halved (up to 20 times) while the residual norm does not decrease.

    Args:
        residual: map R^n -> R^n
        x0: starting point
        steps: finite-difference increments per coordinate
        max_iter: iteration cap
        tol: residual norm accepted as converged

    Raises:
        NewtonConvergenceError: no convergence within max_iter
    """
    max_iter = settings.NEWTON_MAX_ITER if max_iter is None else max_iter
    tol = settings.NEWTON_TOLERANCE if tol is None else tol

    x = np.array(x0, dtype=float)
    fx = residual(x)
    history = [float(np.linalg.norm(fx))]
    for iteration in range(1, max_iter + 1):
        if history[-1] < tol:
            return NewtonResult(x, history, iteration - 1)
        jac = np.empty((fx.size, x.size))
        for j, h in enumerate(steps):
            e = np.zeros_like(x)
            e[j] = h
            jac[:, j] = (residual(x + e) - residual(x - e)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            raise NewtonConvergenceError(history[-1], iteration)

        damping = 1.0
        for _ in range(20):
            candidate = x + damping * step
            try:
                f_candidate = residual(candidate)
            except ParameterError:
                f_candidate = None
            if f_candidate is not None and np.linalg.norm(f_candidate) < history[-1]:
                break
            damping *= 0.5
        else:
            # no decrease available: the residual sits at round-off level
            logger.debug(f"Newton stalled at residual {history[-1]:.3e}")
            if history[-1] < 1e3 * tol:
                return NewtonResult(x, history, iteration - 1)
            raise NewtonConvergenceError(history[-1], iteration)

        x, fx = candidate, f_candidate
        history.append(float(np.linalg.norm(fx)))
        logger.debug(f"Newton iteration {iteration}: residual {history[-1]:.3e}, damping {damping}")

    if history[-1] < tol:
        return NewtonResult(x, history, max_iter)
    raise NewtonConvergenceError(history[-1], max_iter)


# --- rate system ---------------------------------------------------------------

def _check_package(st: ModulationState, pkg: SpectralPackage):
    if not (np.isclose(st.c0, pkg.params.speed) and np.isclose(st.a, pkg.params.weight)):
        raise ParameterError(
            f"state (c0={st.c0}, a={st.a}) does not match package "
            f"(c={pkg.params.speed}, a={pkg.params.weight})"
        )


def modulation_matrix(w: Field, st: ModulationState, pkg: SpectralPackage) -> np.ndarray:
    """The 2x2 rate matrix at the current (w, c); tends to the identity as w -> 0, c -> c0"""
    _check_package(st, pkg)
    model = PerturbationModel(pkg)
    return model.rate_matrix(np.fft.fft(w.values), model.soliton_terms(st.c))


def solve_modulation_rates(
    w: Field,
    v: Field,
    st: ModulationState,
    pkg: SpectralPackage,
    dealias_on: bool = True,
) -> tuple[float, float]:
    """
    Rates (gammadot, cdot) for which the forcing F has no kernel component (P F = 0)

    Args:
        w: weighted perturbation
        v: unweighted perturbation (enters through the product v w)
        st: current modulation state
        pkg: spectral package at (a, c0)
        dealias_on: dealias the product v w as the stepper does

    Returns:
        (gammadot, cdot)

    Raises:
        ModulationConditionError: the matrix condition number exceeds the configured limit
    """
    _check_package(st, pkg)
    model = PerturbationModel(pkg, dealias_on=dealias_on)
    solution = model.solve_rates(np.fft.fft(w.values), w.values, v.values, st.c)
    logger.debug(
        f"Modulation rates: gammadot={solution.gammadot:.3e}, cdot={solution.cdot:.3e}, "
        f"cond={solution.condition_number:.3f}"
    )
    return solution.gammadot, solution.cdot


def advance_modulation(st: ModulationState, rates: tuple[float, float], dt: float) -> ModulationState:
    """Advance (c, gamma, position) over dt at constant rates; exact for constant rates"""
    gammadot, cdot = rates
    return st.model_copy(update={
        "c": st.c + dt * cdot,
        "gamma": st.gamma + dt * gammadot,
        "position": st.position + dt * st.c + 0.5 * dt**2 * cdot,
        "speed_variation": st.speed_variation + dt * abs(cdot),
        "gammadot": gammadot,
        "cdot": cdot,
    })


def constraint_drift(w: Field, pkg: SpectralPackage) -> float:
    """max_i |<w, eta_i>| / ||w||, zero for w = 0"""
    norm = l2_norm(w)
    if norm == 0.0:
        return 0.0
    return float(np.max(np.abs(pkg.coefficients(w))) / norm)


# --- projection onto the soliton manifold ----------------------------------------

def _eta_tilde(c: float, grid) -> np.ndarray:
    # e^{ay} eta_i does not depend on a
    pkg = build_spectral_package(WeightParams(weight=0.0, speed=c), grid)
    return np.vstack([pkg.eta1_tilde.values, pkg.eta2_tilde.values])


def project_initial(
    u0: Field,
    c_guess: float,
    a: float,
    max_iter: Optional[int] = None,
) -> tuple[ModulationState, Field, Field]:
    """
    Split raw data into a modulated soliton plus a constrained perturbation

    Solves <e^{ay}(u0(. + gamma) - psi_c), eta_i(c)> = 0 for (c, gamma) by damped
    Newton, then fixes c0 = c so that the package used along the flow is the
    one the data was projected against.

    Args:
        u0: initial data in the lab frame
        c_guess: starting speed
        a: weight
        max_iter: Newton iteration cap

    Returns:
        (ModulationState, v0, w0)

    Raises:
        NewtonConvergenceError: Newton did not converge
    """
    grid = u0.grid
    if a * grid.half_length > MAX_WEIGHT_EXPONENT:
        raise ParameterError(f"a*L={a * grid.half_length:.1f} too large to weight the initial data")
    dx = grid.spacing
    y = grid.points

    def residual(x: np.ndarray) -> np.ndarray:
        c, gamma = x
        if not c > 0:
            raise ParameterError(f"Newton left the admissible speeds: c={c}")
        v = shift(u0, gamma).values - profile_values("psi", c, y)
        return dx * (_eta_tilde(c, grid) @ v)

    x0 = np.array([c_guess, float(y[int(np.argmax(u0.values))])])
    result = damped_newton(residual, x0, steps=np.array([1e-6, 1e-6]), max_iter=max_iter)
    c, gamma = (float(value) for value in result.x)
    logger.info(f"Initial projection: c={c:.12g}, gamma={gamma:.12g} after {result.iterations} Newton iterations")

    moved = shift(u0, gamma).values
    v0 = Field(grid, moved - profile_values("psi", c, y))
    # only the raw data is weighted explicitly, within MAX_WEIGHT_EXPONENT
    w0 = Field(grid, np.exp(a * y) * moved - profile_values("psi", c, y, a))
    state = ModulationState(c=c, gamma=gamma, c0=c, a=a)
    return state, v0, w0


def reproject(
    v: Field,
    w: Field,
    st: ModulationState,
    pkg: SpectralPackage,
) -> tuple[ModulationState, Field, Field]:
    """
    Restore P w = 0 by moving (c, gamma), working on w without forming e^{ay}

    With the frame shifted by dg and the speed moved to c', the new perturbation is
        w'(y) = e^{-a dg} [w + e^{a.} psi_c](y + dg) - e^{ay} psi_c'(y).

    Returns:
        (new state, v', w')
    """
    _check_package(st, pkg)
    grid, a = w.grid, st.a
    y = grid.points
    dx = grid.spacing
    eta = np.vstack([pkg.eta1.values, pkg.eta2.values])

    def new_w(c_new: float, dg: float) -> np.ndarray:
        moved = shift(w, dg).values + profile_values("psi", st.c, y + dg, a)
        return np.exp(-a * dg) * moved - profile_values("psi", c_new, y, a)

    def residual(x: np.ndarray) -> np.ndarray:
        c_new, dg = x
        if not c_new > 0:
            raise ParameterError(f"Newton left the admissible speeds: c={c_new}")
        return dx * (eta @ new_w(c_new, dg))

    result = damped_newton(residual, np.array([st.c, 0.0]), steps=np.array([1e-7, 1e-7]))
    c_new, dg = (float(value) for value in result.x)
    w_new = Field(grid, new_w(c_new, dg))
    v_new = Field(grid, shift(v, dg).values + profile_values("psi", st.c, y + dg) - profile_values("psi", c_new, y))
    logger.info(f"Re-projection: c {st.c:.10g} -> {c_new:.10g}, gamma shifted by {dg:.3e}")
    update = {"c": c_new, "gamma": st.gamma + dg, "speed_variation": st.speed_variation + abs(c_new - st.c)}
    return st.model_copy(update=update), v_new, w_new
