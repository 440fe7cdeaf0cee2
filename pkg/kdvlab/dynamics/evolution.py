"""
Evolution
Linear groups W1 and W2, the full KdV flow and single steps of the v- and
w-perturbation equations

Sign convention: numpy's forward transform carries e^{-ix xi}, so free waves
of u_t + u_xxx = 0 oscillate as e^{i t xi^3} and W1(t) multiplies by
e^{i t xi^3}. Under the opposite transform sign this is the multiplier
written e^{-i t xi^3}.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField, model_validator

from kdvlab.core.config import settings
from kdvlab.core.errors import ConstraintDriftError, InstabilityError, ParameterError
from kdvlab.dynamics.forcing import PerturbationModel
from kdvlab.dynamics.integrators import Scheme
from kdvlab.dynamics.modulation import ModulationState, constraint_drift
from kdvlab.spectral.grid import Field, Grid1D, dealias_mask, derivative_symbol, symbol_multiply
from kdvlab.spectral.linearized_operator import SpectralPackage, WeightParams, constant_symbol
from kdvlab.spectral.package_manager import PackageManager


class EvolutionConfig(BaseModel):
    """
    Time step, scheme and the reference speed/weight of the perturbation equations

    ETDRK4 treats the dispersive part exactly; dt = 1e-3 at N = 1024, L = 20 pi
    keeps the explicit soliton coupling (|xi| * max psi * dt ~ 0.04) well inside
    the RK4 stability region.
    """

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    dt: float = PydanticField(default_factory=lambda: settings.DEFAULT_DT, gt=0.0)
    scheme: Scheme = Scheme.ETDRK4
    dealias_on: bool = True
    c0: float = PydanticField(default=1.0, gt=0.0)
    a: float = PydanticField(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def check_weight_window(self):
        if self.a >= np.sqrt(self.c0 / 3.0):
            raise ValueError(f"weight a={self.a} must stay below sqrt(c0/3)")
        return self

    @property
    def weight_params(self) -> WeightParams:
        return WeightParams(weight=self.a, speed=self.c0)


@dataclass(frozen=True, eq=False)
class PerturbationState:
    """Snapshot of both perturbation descriptions, the modulation state and the time"""

    v: Field
    w: Field
    mod: ModulationState
    t: float = 0.0

    @property
    def grid(self) -> Grid1D:
        return self.v.grid


def _odd_frequencies(grid: Grid1D) -> np.ndarray:
    xi = grid.frequencies.copy()
    xi[grid.n_points // 2] = 0.0
    return xi


# --- linear groups -------------------------------------------------------------

def airy_group_symbol(grid: Grid1D, t: float) -> np.ndarray:
    return np.exp(1j * t * _odd_frequencies(grid) ** 3)


def dissipation_symbol(grid: Grid1D, params: WeightParams) -> np.ndarray:
    """p_a(xi) = 3a xi^2 + a (c0 - a^2)"""
    a, c0 = params.weight, params.speed
    return 3.0 * a * grid.frequencies**2 + a * (c0 - a**2)


def dissipative_symbol(grid: Grid1D, t: float, params: WeightParams) -> np.ndarray:
    return airy_group_symbol(grid, t) * np.exp(-dissipation_symbol(grid, params) * abs(t))


def apply_W1(f: Field, t: float) -> Field:
    """Airy group: unitary Fourier multiplier e^{i t xi^3}"""
    return symbol_multiply(f, airy_group_symbol(f.grid, t))


def apply_W2(f: Field, t: float, cfg: EvolutionConfig) -> Field:
    """
    Dissipative Airy semigroup e^{i t xi^3 - p_a(xi) t} for t >= 0

    Raises:
        ParameterError: t < 0
    """
    if t < 0:
        raise ParameterError(f"W2 is a forward semigroup; got t={t}")
    return symbol_multiply(f, dissipative_symbol(f.grid, t, cfg.weight_params))


def apply_W2_two_sided(f: Field, t: float, cfg: EvolutionConfig) -> Field:
    """e^{i t xi^3 - p_a(xi) |t|}, defined for all real t"""
    return symbol_multiply(f, dissipative_symbol(f.grid, t, cfg.weight_params))


def weighted_linear_propagator(f: Field, t: float, cfg: EvolutionConfig) -> Field:
    """exp(t A^0) with A^0 the constant-coefficient part of A_{a,c0}: W2 composed with the transport"""
    return symbol_multiply(f, np.exp(t * constant_symbol(f.grid, cfg.weight_params)))


# --- full KdV ------------------------------------------------------------------

def _check_finite(coeffs: np.ndarray, what: str, t: Optional[float] = None):
    if not np.all(np.isfinite(coeffs)):
        raise InstabilityError(f"{what} produced non-finite values", t)


def _kdv_setup(grid: Grid1D, cfg: EvolutionConfig):
    xi = _odd_frequencies(grid)
    linear = 1j * xi**3
    integrator = PackageManager().get_integrator(("kdv", grid), linear, cfg.dt, cfg.scheme)
    mask = dealias_mask(grid) if cfg.dealias_on else np.ones(grid.n_points, dtype=bool)
    d = 1j * xi * mask

    def nonlinear(u_hat: np.ndarray) -> np.ndarray:
        u = np.fft.ifft(u_hat).real
        return -d * np.fft.fft(u * u)

    return integrator, nonlinear


def step_kdv(u: Field, cfg: EvolutionConfig) -> Field:
    """
    One step of u_t + u_xxx + (u^2)_x = 0 in the lab frame

    Raises:
        InstabilityError: the step produced NaN or Inf
    """
    return evolve_kdv(u, cfg, n_steps=1)


def evolve_kdv(u: Field, cfg: EvolutionConfig, n_steps: int) -> Field:
    """n_steps KdV steps without leaving coefficient space"""
    integrator, nonlinear = _kdv_setup(u.grid, cfg)
    u_hat = np.fft.fft(u.values)
    for n in range(n_steps):
        u_hat = integrator.step(u_hat, nonlinear)
        if n % 100 == 0 or n == n_steps - 1:
            _check_finite(u_hat, "KdV step", (n + 1) * cfg.dt)
    return Field(u.grid, np.fft.ifft(u_hat).real)


# --- perturbation equations with frozen modulation --------------------------------

def _model(state: PerturbationState, cfg: EvolutionConfig, package: Optional[SpectralPackage]) -> PerturbationModel:
    if not (np.isclose(state.mod.c0, cfg.c0) and np.isclose(state.mod.a, cfg.a)):
        raise ParameterError("modulation state and evolution config disagree on (c0, a)")
    if package is None:
        package = PackageManager().get_package(cfg.weight_params, state.grid)
    return PerturbationModel(package, dealias_on=cfg.dealias_on)


def step_v(
    state: PerturbationState,
    cfg: EvolutionConfig,
    package: Optional[SpectralPackage] = None,
    nonlinear: bool = True,
) -> Field:
    """
    One step of the co-moving v-equation with (c, gammadot, cdot) frozen at state.mod

    The dispersive part d(-d^2 + c0) is integrated exactly; the soliton
    coupling, transport correction, modulation forcing and -d(v^2) go through
    the Runge-Kutta stages. CoupledStepper advances the modulation jointly.

    Args:
        state: current snapshot
        cfg: evolution config
        package: spectral package (fetched from the cache when omitted)
        nonlinear: False drops -d(v^2) (linearized flow)
    """
    model = _model(state, cfg, package)
    mod = state.mod
    terms = model.soliton_terms(mod.c)
    integrator = PackageManager().get_integrator(("v", state.grid, cfg.c0), model.v_linear, cfg.dt, cfg.scheme)

    def rhs(v_hat: np.ndarray) -> np.ndarray:
        v = model.real(v_hat)
        return model.v_forcing(v_hat, v, mod.c, mod.gammadot, mod.cdot, terms, nonlinear=nonlinear)

    v_hat = integrator.step(np.fft.fft(state.v.values), rhs)
    _check_finite(v_hat, "v step", state.t + cfg.dt)
    return Field(state.grid, model.real(v_hat))


def step_w(
    state: PerturbationState,
    cfg: EvolutionConfig,
    package: Optional[SpectralPackage] = None,
    coupling: bool = True,
    forcing: bool = True,
    drift_tolerance: Optional[float] = None,
) -> Field:
    """
    One step of w_t = Q(A_{a,c0} w + F) with the modulation frozen at state.mod

    While P w = 0 this is A w + Q F; the projected form keeps <w, eta_i> fixed
    on the grid.

    Args:
        state: current snapshot
        cfg: evolution config
        package: spectral package at (a, c0)
        coupling: include -2 (d - a)(psi_c0 w)
        forcing: include Q F
        drift_tolerance: limit on ||P w|| / ||w|| after the step

    Raises:
        ConstraintDriftError: the step left the continuous spectral subspace
        InstabilityError: non-finite values
    """
    model = _model(state, cfg, package)
    mod = state.mod
    terms = model.soliton_terms(mod.c)
    v = state.v.values
    integrator = PackageManager().get_integrator(
        ("w", state.grid, cfg.c0, cfg.a), model.w_linear, cfg.dt, cfg.scheme
    )

    def rhs(w_hat: np.ndarray) -> np.ndarray:
        w = model.real(w_hat)
        if coupling and forcing:
            return model.w_rhs(w_hat, w, v, mod.c, mod.gammadot, mod.cdot, terms)
        out = np.zeros_like(w_hat)
        if coupling:
            out += model.w_coupling(w)
        if forcing:
            out += model.w_forcing(w_hat, w, v, mod.c, mod.gammadot, mod.cdot, terms)
        return out

    w_hat = integrator.step(np.fft.fft(state.w.values), rhs)
    _check_finite(w_hat, "w step", state.t + cfg.dt)
    w_new = Field(state.grid, model.real(w_hat))

    tolerance = settings.CONSTRAINT_TOLERANCE if drift_tolerance is None else drift_tolerance
    if coupling or forcing:
        drift = constraint_drift(w_new, model.package)
        if drift > tolerance:
            logger.warning(f"Constraint drift {drift:.3e} at t={state.t + cfg.dt:.4f}")
            raise ConstraintDriftError(drift, tolerance)
    return w_new
