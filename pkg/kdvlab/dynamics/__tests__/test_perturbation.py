import numpy as np
import pytest

from kdvlab.dynamics.evolution import EvolutionConfig, PerturbationState, evolve_kdv
from kdvlab.dynamics.integrators import Scheme
from kdvlab.dynamics.modulation import ModulationState, constraint_drift, project_initial
from kdvlab.dynamics.perturbation import CoupledStepper
from kdvlab.spectral.grid import Field, l2_norm, shift
from kdvlab.spectral.linearized_operator import WeightParams, project_Q
from kdvlab.spectral.package_manager import PackageManager
from kdvlab.spectral.soliton import SolitonParams, profile_values, psi


def _projected(grid, amplitude=1e-3, a=0.3):
    bump = Field.from_function(grid, lambda y: amplitude * np.exp(-((y - 2.0) ** 2) / 2) * np.cos(y))
    u0 = psi(SolitonParams(speed=1.0), grid) + bump
    mod, v0, w0 = project_initial(u0, c_guess=1.0, a=a)
    return u0, PerturbationState(v=v0, w=w0, mod=mod)


def _stepper(state, scheme=Scheme.ETDRK4, dt=1e-3):
    mod = state.mod
    cfg = EvolutionConfig(dt=dt, c0=mod.c0, a=mod.a, scheme=scheme)
    package = PackageManager().get_package(WeightParams(weight=mod.a, speed=mod.c0), state.grid)
    return CoupledStepper(cfg, package)


def _run(stepper, state, n_steps):
    for _ in range(n_steps):
        state = stepper.step(state)
    return state


def test_soliton_is_a_fixed_point(line_grid):
    zero = Field.zeros(line_grid)
    state = PerturbationState(v=zero, w=zero, mod=ModulationState(c=1.0, c0=1.0, a=0.3))
    stepper = _stepper(state)
    out = _run(stepper, stepper.with_rates(state), 20)
    assert np.all(out.v.values == 0.0)
    assert np.all(out.w.values == 0.0)
    assert out.mod.c == 1.0
    assert out.mod.position == pytest.approx(20 * 1e-3)
    assert out.t == pytest.approx(0.02)


def test_pack_unpack_preserves_the_state(line_grid):
    _, state = _projected(line_grid)
    stepper = _stepper(state)
    state = stepper.with_rates(state)
    again = stepper.unpack(stepper.pack(state), state.mod, state.t)
    np.testing.assert_allclose(again.v.values, state.v.values, atol=1e-16)
    assert again.mod == state.mod


def test_constraint_and_weight_relation_hold_along_the_flow(line_grid):
    _, state = _projected(line_grid)
    stepper = _stepper(state)
    state = _run(stepper, stepper.with_rates(state), 200)

    assert constraint_drift(state.w, stepper.package) < 1e-4
    trusted = np.abs(line_grid.points) < 20.0
    weighted_v = np.exp(state.mod.a * line_grid.points[trusted]) * state.v.values[trusted]
    assert np.max(np.abs(state.w.values[trusted] - weighted_v)) < 1e-6
    assert state.mod.speed_variation >= abs(state.mod.c - state.mod.c0)


def test_unweighted_constraint_holds_across_the_window_edge(coarse_grid):
    package = PackageManager().get_package(WeightParams(weight=0.0, speed=1.0), coarse_grid)
    bump = Field.from_function(coarse_grid, lambda y: 1e-3 * np.exp(-((y + 55.0) ** 2)))
    w0 = project_Q(bump, package)
    state = PerturbationState(v=w0, w=w0, mod=ModulationState(c=1.0, c0=1.0, a=0.0))
    stepper = _stepper(state, dt=1e-2)

    out = _run(stepper, stepper.with_rates(state), 200)
    assert constraint_drift(out.w, package) < 1e-5


def test_schemes_agree(line_grid):
    _, state = _projected(line_grid)
    runs = []
    for scheme in Scheme:
        stepper = _stepper(state, scheme=scheme)
        runs.append(_run(stepper, stepper.with_rates(state), 50))
    assert l2_norm(runs[0].v - runs[1].v) < 1e-8 * l2_norm(state.v)
    assert runs[0].mod.c == pytest.approx(runs[1].mod.c, abs=1e-10)


@pytest.mark.slow
def test_co_moving_solution_matches_lab_frame_kdv(line_grid):
    u0, state = _projected(line_grid)
    stepper = _stepper(state)
    out = _run(stepper, stepper.with_rates(state), 1000)

    mod = out.mod
    profile = Field(line_grid, profile_values("psi", mod.c, line_grid.points))
    reconstructed = shift(profile + out.v, -(mod.position + mod.gamma))
    u = evolve_kdv(u0, EvolutionConfig(dt=1e-3), n_steps=1000)
    assert l2_norm(u - reconstructed) < 1e-6
