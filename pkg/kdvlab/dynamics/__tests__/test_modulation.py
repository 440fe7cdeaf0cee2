import numpy as np
import pytest
from pydantic import ValidationError

from kdvlab.core.errors import ModulationConditionError, NewtonConvergenceError, ParameterError
from kdvlab.dynamics.modulation import (
    ModulationState,
    advance_modulation,
    constraint_drift,
    damped_newton,
    modulation_matrix,
    project_initial,
    reproject,
    solve_modulation_rates,
)
from kdvlab.spectral.grid import Field, shift
from kdvlab.spectral.linearized_operator import WeightParams
from kdvlab.spectral.package_manager import PackageManager
from kdvlab.spectral.soliton import SolitonParams, psi


@pytest.fixture
def reference_state():
    return ModulationState(c=1.0, c0=1.0, a=0.3)


def _bump(grid, center=3.0, amplitude=1e-3):
    return Field.from_function(grid, lambda y: amplitude * np.exp(-((y - center) ** 2) / 2))


def test_state_validation():
    with pytest.raises(ValidationError):
        ModulationState(c=0.0, c0=1.0, a=0.3)
    with pytest.raises(ValidationError):
        ModulationState(c=1.0, c0=1.0, a=0.3, speed_variation=-1.0)


# --- Newton -----------------------------------------------------------------------


def test_damped_newton_solves_a_small_system():
    result = damped_newton(lambda x: np.array([x[0] ** 2 - 2.0, x[1] - x[0]]), np.array([1.0, 0.0]), np.full(2, 1e-7))
    np.testing.assert_allclose(result.x, [np.sqrt(2.0)] * 2, rtol=1e-10)
    assert result.residuals[-1] < 1e-10


def _quadratic_ratios(residuals, floor=1e-12):
    return [after / before**2 for before, after in zip(residuals, residuals[1:]) if after > floor]


def test_damped_newton_converges_quadratically():
    result = damped_newton(lambda x: np.array([x[0] ** 2 - 2.0, x[1] - x[0]]), np.array([1.0, 0.0]), np.full(2, 1e-7))
    ratios = _quadratic_ratios(result.residuals)
    assert len(ratios) >= 3
    # r_{k+1} / r_k^2 tends to 1/8 for x^2 - 2
    assert max(ratios[1:]) < 0.5
    assert result.iterations <= 7


def test_damped_newton_reports_failure():
    with pytest.raises(NewtonConvergenceError) as info:
        damped_newton(lambda x: np.array([x[0] ** 2 + 1.0]), np.array([0.5]), np.array([1e-7]), max_iter=10)
    assert info.value.residual > 0.5


# --- rate system ----------------------------------------------------------------------


def test_rate_matrix_is_identity_at_the_soliton(line_grid, package, reference_state):
    matrix = modulation_matrix(Field.zeros(line_grid), reference_state, package)
    np.testing.assert_allclose(matrix, np.eye(2), atol=1e-8)


def test_rates_vanish_at_the_soliton(line_grid, package, reference_state):
    zero = Field.zeros(line_grid)
    gammadot, cdot = solve_modulation_rates(zero, zero, reference_state, package)
    assert gammadot == pytest.approx(0.0, abs=1e-14)
    assert cdot == pytest.approx(0.0, abs=1e-14)


def test_large_perturbation_is_ill_conditioned(line_grid, package, reference_state):
    w = _bump(line_grid, center=0.5, amplitude=1e4)
    with pytest.raises(ModulationConditionError) as info:
        solve_modulation_rates(w, Field.zeros(line_grid), reference_state, package)
    assert info.value.condition_number > 10.0


def test_state_must_match_package(line_grid, package):
    state = ModulationState(c=1.0, c0=1.5, a=0.3)
    with pytest.raises(ParameterError):
        modulation_matrix(Field.zeros(line_grid), state, package)


def test_advance_modulation_is_exact_for_constant_rates(reference_state):
    st = reference_state
    for _ in range(4):
        st = advance_modulation(st, (0.02, -0.01), 0.25)
    assert st.c == pytest.approx(0.99)
    assert st.gamma == pytest.approx(0.02)
    # int_0^1 (1 - 0.01 t) dt
    assert st.position == pytest.approx(0.995)
    assert st.speed_variation == pytest.approx(0.01)
    assert (st.gammadot, st.cdot) == (0.02, -0.01)


def test_constraint_drift(line_grid, package):
    assert constraint_drift(Field.zeros(line_grid), package) == 0.0
    assert constraint_drift(package.zeta2, package) > 0.1


# --- projection ------------------------------------------------------------------------


def test_projection_recovers_an_exact_soliton(line_grid):
    u0 = shift(psi(SolitonParams(speed=1.05), line_grid), -0.7)
    state, v0, w0 = project_initial(u0, c_guess=1.0, a=0.3)
    assert state.c == pytest.approx(1.05, abs=1e-9)
    assert state.gamma == pytest.approx(0.7, abs=1e-9)
    assert state.c0 == state.c
    assert np.max(np.abs(v0.values)) < 1e-8
    assert np.max(np.abs(w0.values)) < 1e-6


def test_projection_removes_the_kernel_component(line_grid):
    u0 = psi(SolitonParams(speed=1.0), line_grid) + _bump(line_grid, center=2.0, amplitude=2e-3)
    state, v0, w0 = project_initial(u0, c_guess=1.0, a=0.3)
    pkg = PackageManager().get_package(WeightParams(weight=state.a, speed=state.c0), line_grid)
    assert constraint_drift(w0, pkg) < 1e-7
    np.testing.assert_allclose(w0.values, np.exp(0.3 * line_grid.points) * v0.values, atol=1e-12)


def test_projection_newton_converges_quadratically(line_grid, monkeypatch):
    histories = []

    def recording(*args, **kwargs):
        result = damped_newton(*args, **kwargs)
        histories.append(result.residuals)
        return result

    monkeypatch.setattr("kdvlab.dynamics.modulation.damped_newton", recording)
    u0 = shift(psi(SolitonParams(speed=1.0), line_grid), -0.2) + _bump(line_grid, center=2.0, amplitude=2e-3)
    project_initial(u0, c_guess=0.97, a=0.3)

    (residuals,) = histories
    ratios = _quadratic_ratios(residuals)
    assert ratios
    assert max(ratios) < 100.0
    assert len(residuals) <= 7


def test_reprojection_restores_the_constraint(line_grid, package, reference_state):
    w = Field(line_grid, package.zeta1.values * 1e-5 + _bump(line_grid).values)
    v = Field(line_grid, np.exp(-0.3 * line_grid.points) * w.values)
    assert constraint_drift(w, package) > 1e-4

    state, v_new, w_new = reproject(v, w, reference_state, package)
    assert constraint_drift(w_new, package) < 1e-7
    assert state.speed_variation == pytest.approx(abs(state.c - 1.0))
    trusted = np.abs(line_grid.points) < 20.0
    np.testing.assert_allclose(
        w_new.values[trusted], np.exp(0.3 * line_grid.points[trusted]) * v_new.values[trusted], atol=1e-9
    )
