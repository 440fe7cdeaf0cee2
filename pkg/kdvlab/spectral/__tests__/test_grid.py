import math

import numpy as np
import pytest
from scipy import special

from kdvlab.core.errors import GridError, NonFiniteFieldError
from kdvlab.spectral.grid import (
    Field,
    SpectralField,
    cumulative_integral,
    dealias,
    evaluate,
    from_spectral,
    h1_norm,
    hs_norm,
    inner,
    l2_norm,
    make_grid,
    peak_location,
    shift,
    shifted_antiderivative,
    shifted_derivative,
    spectral_derivative,
    spectral_l2_norm,
    to_spectral,
)


def test_make_grid_small_circle(circle_grid):
    assert circle_grid.spacing == pytest.approx(2 * math.pi / 16, rel=1e-15)
    assert np.array_equal(np.sort(circle_grid.frequencies), np.arange(-8, 8).astype(float))
    assert 0.0 in circle_grid.frequencies


def test_make_grid_default_line(line_grid):
    assert line_grid.max_frequency == pytest.approx(25.6, abs=1e-12)
    assert np.max(line_grid.frequencies) == pytest.approx(511 / 20, rel=1e-14)
    assert line_grid.spacing * line_grid.n_points == pytest.approx(2 * line_grid.half_length, rel=1e-15)
    assert np.all(np.diff(line_grid.monotone_frequencies) > 0)


@pytest.mark.parametrize("half_length, n_points", [(math.pi, 17), (math.pi, 8), (0.0, 16), (-1.0, 16)])
def test_make_grid_rejects_bad_requests(half_length, n_points):
    with pytest.raises(GridError):
        make_grid(half_length, n_points)


def test_field_rejects_non_finite(circle_grid):
    values = np.zeros(16)
    values[3] = np.nan
    with pytest.raises(NonFiniteFieldError):
        Field(circle_grid, values)


def test_derivative_of_sine_is_cosine(circle_grid):
    f = Field.from_function(circle_grid, np.sin)
    df = spectral_derivative(f, 1)
    assert np.max(np.abs(df.values - np.cos(circle_grid.points))) < 1e-12


def test_derivative_of_constant_vanishes(circle_grid):
    one = Field(circle_grid, np.ones(16))
    for order in (1, 2, 3):
        assert np.max(np.abs(spectral_derivative(one, order).values)) < 1e-13


def test_third_derivative_of_sech2(line_grid):
    y = line_grid.points
    s = 1.0 / np.cosh(y / 2) ** 2
    t = np.tanh(y / 2)
    f = Field(line_grid, s)
    exact = -s * t**3 + 2 * s**2 * t
    assert np.max(np.abs(spectral_derivative(f, 3).values - exact)) < 1e-8
    assert np.max(np.abs(spectral_derivative(f, 1).values + s * t)) < 1e-10


def test_derivative_is_linear(line_grid, rng):
    f = Field(line_grid, np.exp(-line_grid.points**2) * rng.standard_normal())
    g = Field(line_grid, np.exp(-(line_grid.points - 1) ** 2))
    left = spectral_derivative(2.5 * f - 0.5 * g, 3)
    right = 2.5 * spectral_derivative(f, 3) - 0.5 * spectral_derivative(g, 3)
    assert np.max(np.abs(left.values - right.values)) < 1e-10


def test_dealias_keeps_low_modes(line_grid):
    f = Field.from_function(line_grid, lambda y: np.cos(3 * y / 20))
    kept = dealias(to_spectral(f))
    assert np.max(np.abs(kept.coeffs - to_spectral(f).coeffs)) < 1e-12


def test_dealias_removes_top_mode(line_grid):
    coeffs = np.zeros(line_grid.n_points, dtype=complex)
    coeffs[line_grid.n_points // 2 - 1] = 1.0
    assert np.all(dealias(SpectralField(line_grid, coeffs)).coeffs == 0)


def test_dealias_white_noise_mode_count(rng):
    grid = make_grid(math.pi, 64)
    f = Field(grid, rng.standard_normal(64))
    kept = dealias(to_spectral(f))
    assert np.count_nonzero(kept.coeffs) == 2 * (64 // 3) + 1


def test_parseval_and_round_trip(line_grid, rng):
    f = Field(line_grid, rng.standard_normal(line_grid.n_points))
    f_hat = to_spectral(f)
    assert spectral_l2_norm(f_hat) == pytest.approx(l2_norm(f), rel=1e-12)
    back = from_spectral(f_hat)
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))


def test_real_origin_coefficients_invert_to_real(line_grid, rng):
    f = Field(line_grid, rng.standard_normal(line_grid.n_points))
    inverse = np.fft.ifft(to_spectral(f).coeffs)
    assert np.linalg.norm(inverse.imag) < 1e-10 * np.linalg.norm(inverse.real)


def test_norms_of_gaussian(line_grid):
    y = line_grid.points
    f = Field(line_grid, np.exp(-(y**2)))
    assert l2_norm(f) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    # int (2y e^{-y^2})^2 = sqrt(pi/2)
    assert h1_norm(f) ** 2 == pytest.approx(2 * math.sqrt(math.pi / 2), rel=1e-10)
    assert hs_norm(f, 1.0) == pytest.approx(h1_norm(f), rel=1e-12)
    assert hs_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-12)
    assert inner(f, f) == pytest.approx(l2_norm(f) ** 2, rel=1e-14)


def test_shift_translates(line_grid):
    y = line_grid.points
    f = Field(line_grid, np.exp(-(y**2)))
    moved = shift(f, 1.5)
    assert np.max(np.abs(moved.values - np.exp(-((y + 1.5) ** 2)))) < 1e-12


def test_shifted_derivative_symbol(circle_grid):
    f = Field.from_function(circle_grid, lambda y: np.cos(2 * y))
    expected = -2 * np.sin(2 * circle_grid.points) - 0.3 * f.values
    assert np.max(np.abs(shifted_derivative(f, 0.3).values - expected)) < 1e-12


def test_cumulative_integral_and_evaluate(line_grid):
    y = line_grid.points
    f = Field(line_grid, np.exp(-(y**2)))
    total = cumulative_integral(f).values[-1]
    assert total == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert evaluate(f, 0.123) == pytest.approx(math.exp(-(0.123**2)), abs=1e-12)


def test_peak_location_between_samples(line_grid):
    y = line_grid.points
    f = Field(line_grid, np.exp(-((y - 0.0371) ** 2)))
    assert peak_location(f) == pytest.approx(0.0371, abs=1e-10)


def test_shifted_antiderivative_of_weighted_gaussian(line_grid):
    a = 0.5
    y = line_grid.points
    f = Field(line_grid, np.exp(-a * y - y**2))
    expected = np.exp(-a * y) * 0.5 * math.sqrt(math.pi) * special.erfc(-y)
    np.testing.assert_allclose(shifted_antiderivative(f, a).values, expected, atol=1e-10)


def test_shifted_antiderivative_needs_positive_shift(line_grid):
    with pytest.raises(GridError):
        shifted_antiderivative(Field(line_grid, np.zeros(line_grid.n_points)), 0.0)
