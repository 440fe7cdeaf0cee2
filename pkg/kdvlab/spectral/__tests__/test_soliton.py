import math

import numpy as np
import pytest
from pydantic import ValidationError

from kdvlab.core.errors import ParameterError
from kdvlab.spectral.grid import Field, cumulative_integral, make_grid, spectral_derivative
from kdvlab.spectral.soliton import (
    SolitonParams,
    dpsi_dc,
    dpsi_dy,
    int_dpsi_dc,
    lyapunov_functional,
    mass,
    momentum,
    profile_residual,
    profile_values,
    psi,
    soliton_residual,
    travelling_soliton,
    weighted_profile,
)


def _value_at_zero(field: Field) -> float:
    return float(field.values[field.grid.n_points // 2])


@pytest.mark.parametrize("c, peak", [(1.0, 1.5), (4.0, 6.0)])
def test_psi_peak(line_grid, c, peak):
    assert _value_at_zero(psi(SolitonParams(speed=c), line_grid)) == pytest.approx(peak, rel=1e-15)


def test_psi_vanishes_at_ends(line_grid):
    field = psi(SolitonParams(speed=1.0), line_grid)
    assert abs(field.values[0]) < 1e-12
    assert abs(field.values[-1]) < 1e-12


def test_non_positive_speed_rejected(line_grid):
    with pytest.raises(ValidationError):
        SolitonParams(speed=0.0)
    with pytest.raises(ParameterError):
        profile_values("psi", -1.0, line_grid.points)


def test_unknown_profile_rejected(line_grid):
    with pytest.raises(ValueError):
        profile_values("d2psi", 1.0, line_grid.points)


def test_derivative_values_at_zero(line_grid):
    p = SolitonParams(speed=1.0)
    assert _value_at_zero(dpsi_dy(p, line_grid)) == pytest.approx(0.0, abs=1e-15)
    assert _value_at_zero(dpsi_dc(p, line_grid)) == pytest.approx(1.5, rel=1e-15)


def test_dpsi_dy_matches_spectral_derivative(line_grid):
    p = SolitonParams(speed=1.0)
    spectral = spectral_derivative(psi(p, line_grid), 1)
    assert np.max(np.abs(dpsi_dy(p, line_grid).values - spectral.values)) < 1e-8


def test_dpsi_dc_matches_finite_difference(line_grid):
    h = 1e-5
    y = line_grid.points
    difference = (profile_values("psi", 1.0 + h, y) - profile_values("psi", 1.0 - h, y)) / (2 * h)
    assert np.max(np.abs(dpsi_dc(SolitonParams(speed=1.0), line_grid).values - difference)) < 1e-6


def test_closed_form_primitive_matches_quadrature(line_grid):
    p = SolitonParams(speed=1.0)
    quadrature = cumulative_integral(dpsi_dc(p, line_grid))
    # trapezoid partial sums are second order; the full integral is spectrally accurate
    assert np.max(np.abs(int_dpsi_dc(p, line_grid).values - quadrature.values)) < 2e-3
    assert int_dpsi_dc(p, line_grid).values[-1] == pytest.approx(3.0, rel=1e-10)


@pytest.mark.parametrize("c", [0.5, 1.0, 4.0])
def test_soliton_residual_small(line_grid, c):
    assert soliton_residual(SolitonParams(speed=c), line_grid) < 1e-8


def test_soliton_residual_fine_grid():
    grid = make_grid(20 * math.pi, 2048)
    assert soliton_residual(SolitonParams(speed=4.0), grid) < 1e-8


def test_scaled_profile_is_not_a_solution(line_grid):
    scaled = 1.1 * psi(SolitonParams(speed=1.0), line_grid)
    assert profile_residual(scaled, 1.0) > 1e-2


@pytest.mark.parametrize("c", [0.5, 1.0, 4.0])
def test_mass_identity(line_grid, c):
    assert mass(psi(SolitonParams(speed=c), line_grid)) == pytest.approx(6 * math.sqrt(c), rel=1e-10)


def test_momentum_closed_form(line_grid):
    # int psi_c^2 = 6 c^{3/2}
    assert momentum(psi(SolitonParams(speed=1.0), line_grid)) == pytest.approx(6.0, rel=1e-10)


def test_scaling_consistency(line_grid):
    y = line_grid.points
    c = 2.25
    assert np.max(np.abs(profile_values("psi", c, y) - c * profile_values("psi", 1.0, math.sqrt(c) * y))) < 1e-12


def test_weighted_profile_equals_weight_times_profile(line_grid):
    p = SolitonParams(speed=1.0)
    y = line_grid.points
    weighted = weighted_profile("dpsi_dc", p, line_grid, weight=0.3).values
    assert np.max(np.abs(weighted - np.exp(0.3 * y) * dpsi_dc(p, line_grid).values)) < 1e-12


def test_weighted_profile_does_not_overflow():
    grid = make_grid(400.0, 4096)
    values = weighted_profile("int_dpsi_dc", SolitonParams(speed=1.0), grid, weight=-0.4).values
    assert np.all(np.isfinite(values))


def test_travelling_soliton_moves_with_speed(line_grid):
    p = SolitonParams(speed=1.0, offset=-2.0)
    moved = travelling_soliton(p, line_grid, 3.0)
    expected = profile_values("psi", 1.0, line_grid.points - 1.0)
    assert np.max(np.abs(moved.values - expected)) < 1e-15


def test_lyapunov_functional_of_soliton(line_grid):
    # E[psi_c] with c0 = c: int 1/2 psi'^2 - 1/3 psi^3 + 1/2 c psi^2 = 6/5 c^{5/2}
    energy = lyapunov_functional(psi(SolitonParams(speed=1.0), line_grid), 1.0)
    assert energy == pytest.approx(1.2, rel=1e-9)
