"""
Coupled Perturbation Stepper
Advances (v, w, c, gamma, int c, int |cdot|) as one stacked system so that the
modulation rates are re-solved inside every Runge-Kutta stage
"""

from typing import Optional

import numpy as np
from loguru import logger

from kdvlab.core.config import settings
from kdvlab.core.errors import ConstraintDriftError, InstabilityError
from kdvlab.dynamics.evolution import EvolutionConfig, PerturbationState
from kdvlab.dynamics.forcing import PerturbationModel
from kdvlab.dynamics.modulation import ModulationState, constraint_drift, reproject
from kdvlab.spectral.grid import Field
from kdvlab.spectral.linearized_operator import SpectralPackage
from kdvlab.spectral.package_manager import PackageManager

N_PARAMS = 4


class CoupledStepper:
    """
    Stacked state [v_hat, w_hat, c, gamma, position, speed_variation]

    The linear part is diagonal: the dispersive symbols of the v- and
    w-equations and zero for the parameters, which the exponential schemes
    then integrate with the classical RK4 weights.
    """

    def __init__(
        self,
        cfg: EvolutionConfig,
        package: Optional[SpectralPackage] = None,
        project_forcing: bool = True,
        drift_tolerance: Optional[float] = None,
    ):
        self.cfg = cfg
        self.package = package
        self.project_forcing = project_forcing
        self.drift_tolerance = settings.CONSTRAINT_TOLERANCE if drift_tolerance is None else drift_tolerance
        self._model: Optional[PerturbationModel] = None
        self._integrator = None

    def _prepare(self, state: PerturbationState):
        if self._model is not None and self._model.grid == state.grid:
            return
        package = self.package or PackageManager().get_package(self.cfg.weight_params, state.grid)
        self.package = package
        self._model = PerturbationModel(package, dealias_on=self.cfg.dealias_on)
        linear = np.concatenate([self._model.v_linear, self._model.w_linear, np.zeros(N_PARAMS)])
        key = ("coupled", state.grid, self.cfg.c0, self.cfg.a)
        self._integrator = PackageManager().get_integrator(key, linear, self.cfg.dt, self.cfg.scheme)

    def _rhs(self, x: np.ndarray) -> np.ndarray:
        model = self._model
        n = model.grid.n_points
        v_hat, w_hat = x[:n], x[n:2 * n]
        c = x[2 * n].real
        v, w = model.real(v_hat), model.real(w_hat)
        terms = model.soliton_terms(c)
        rates = model.solve_rates(w_hat, w, v, c, terms)
        dv = model.v_forcing(v_hat, v, c, rates.gammadot, rates.cdot, terms)
        dw = model.w_rhs(w_hat, w, v, c, rates.gammadot, rates.cdot, terms, project=self.project_forcing)
        return np.concatenate([dv, dw, [rates.cdot, rates.gammadot, c, abs(rates.cdot)]])

    def pack(self, state: PerturbationState) -> np.ndarray:
        mod = state.mod
        return np.concatenate([
            np.fft.fft(state.v.values),
            np.fft.fft(state.w.values),
            np.array([mod.c, mod.gamma, mod.position, mod.speed_variation], dtype=complex),
        ])

    def unpack(self, x: np.ndarray, template: ModulationState, t: float) -> PerturbationState:
        model = self._model
        n = model.grid.n_points
        v = Field(model.grid, model.real(x[:n]))
        w = Field(model.grid, model.real(x[n:2 * n]))
        c, gamma, position, variation = (float(value) for value in x[2 * n:].real)
        rates = model.solve_rates(x[n:2 * n], w.values, v.values, c)
        mod = template.model_copy(update={
            "c": c,
            "gamma": gamma,
            "position": position,
            "speed_variation": variation,
            "gammadot": rates.gammadot,
            "cdot": rates.cdot,
        })
        return PerturbationState(v=v, w=w, mod=mod, t=t)

    def with_rates(self, state: PerturbationState) -> PerturbationState:
        """The same snapshot with the modulation rates solved at its own (v, w, c)"""
        self._prepare(state)
        return self.unpack(self.pack(state), state.mod, state.t)

    def step(self, state: PerturbationState) -> PerturbationState:
        """
        Advance one time step

        Raises:
            ModulationConditionError: the rate matrix became ill-conditioned
            ConstraintDriftError: ||P w|| / ||w|| exceeded the tolerance
            InstabilityError: non-finite values
        """
        self._prepare(state)
        t_new = state.t + self.cfg.dt
        x = self._integrator.step(self.pack(state), self._rhs)
        if not np.all(np.isfinite(x)):
            raise InstabilityError("coupled perturbation step produced non-finite values", t_new)
        new_state = self.unpack(x, state.mod, t_new)
        drift = constraint_drift(new_state.w, self.package)
        if drift > self.drift_tolerance:
            raise ConstraintDriftError(drift, self.drift_tolerance)
        return new_state

    def reproject(self, state: PerturbationState) -> PerturbationState:
        """Restore P w = 0 after drift and re-solve the rates"""
        self._prepare(state)
        mod, v, w = reproject(state.v, state.w, state.mod, self.package)
        logger.info(f"Re-projected at t={state.t:.4f}")
        return self.with_rates(PerturbationState(v=v, w=w, mod=mod, t=state.t))
