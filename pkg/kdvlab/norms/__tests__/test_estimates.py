import math

import numpy as np
import pytest

from kdvlab.core.errors import ZeroNormError
from kdvlab.norms.estimates import (
    EstimateKind,
    bilinear_ratio,
    duhamel_response,
    embedding_constant,
    embedding_ratio,
    free_evolution,
    linear_estimate_ratio,
    projection_ratio,
    resonance_defect,
    shell_parseval_defect,
)
from kdvlab.norms.spacetime import SpaceTimeField, gaussian_packet, probe_window, random_bandlimited
from kdvlab.spectral.grid import Field, make_grid
from kdvlab.spectral.linearized_operator import WeightParams
from kdvlab.spectral.package_manager import PackageManager

S = 1.0


@pytest.fixture
def probe_grid():
    return make_grid(4.0 * math.pi, 64)


def _field(grid, rng):
    return random_bandlimited(grid, 64, 0.125, rng, xi_max=2.0, tau_max=10.0, t0=-4.0)


def test_resonance_identity(rng):
    tau1, xi1, tau2, xi2 = rng.uniform(-10.0, 10.0, size=(4, 10000))
    assert np.max(resonance_defect(tau1, xi1, tau2, xi2)) < 1e-10


def test_shell_parseval(probe_grid, rng):
    for _ in range(20):
        assert shell_parseval_defect(_field(probe_grid, rng)) < 1e-10
    assert shell_parseval_defect(probe_window(probe_grid, 64)) == 0.0


def test_embedding_stays_below_its_constant(probe_grid, rng):
    bound = embedding_constant(S, 2.0 * math.pi / 8.0)
    for _ in range(20):
        assert embedding_ratio(_field(probe_grid, rng), S) <= bound


def test_bilinear_ratio_is_finite(probe_grid, rng):
    ratio = bilinear_ratio(_field(probe_grid, rng), _field(probe_grid, rng), S)
    assert np.isfinite(ratio) and ratio > 0.0
    with pytest.raises(ValueError):
        bilinear_ratio(_field(probe_grid, rng), _field(probe_grid, rng), -0.5)


def test_free_evolution_starts_at_the_data(probe_grid):
    f = Field(probe_grid, gaussian_packet(probe_grid, wavenumber=1.0))
    rows = free_evolution(f, np.array([0.0, 1.0]), WeightParams(weight=0.3, speed=1.0))
    np.testing.assert_allclose(rows[0], f.values, atol=1e-14)
    assert np.linalg.norm(rows[1]) < np.linalg.norm(rows[0])


@pytest.mark.parametrize("params", [None, WeightParams(weight=0.3, speed=1.0)])
def test_duhamel_response_of_constant_forcing(probe_grid, params):
    g = gaussian_packet(probe_grid, width=2.0, wavenumber=1.0)
    forcing = SpaceTimeField(probe_grid, 0.125, np.tile(g, (64, 1)), t0=-4.0)
    response = duhamel_response(forcing, params)

    xi = probe_grid.frequencies.copy()
    xi[probe_grid.n_points // 2] = 0.0
    p = np.zeros_like(xi) if params is None else 3 * 0.3 * probe_grid.frequencies**2 + 0.3 * 0.91
    g_hat = np.fft.fft(g)
    for t, row in zip(forcing.times, response.values):
        rate = 1j * xi**3 - p if t >= 0 else 1j * xi**3 + p
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(rate == 0, t, (np.exp(rate * t) - 1.0) / rate)
        np.testing.assert_allclose(row, np.fft.ifft(factor * g_hat).real, atol=1e-10)


def test_duhamel_needs_time_zero_on_the_lattice(probe_grid):
    forcing = SpaceTimeField(probe_grid, 0.125, np.zeros((64, 64)), t0=-4.06)
    with pytest.raises(ValueError):
        duhamel_response(forcing)


@pytest.mark.parametrize("kind", list(EstimateKind))
def test_linear_estimate_ratios_are_finite(probe_grid, rng, kind):
    params = WeightParams(weight=0.3, speed=1.0)
    F = _field(probe_grid, rng)
    if kind in (EstimateKind.AIRY_HOM, EstimateKind.DISS_HOM):
        data = (Field(probe_grid, F.values[0]), probe_window(probe_grid, 64))
    else:
        data = F
    ratio = linear_estimate_ratio(data, kind, S, params)
    assert np.isfinite(ratio) and ratio > 0.0


def test_dissipative_kinds_need_params(probe_grid, rng):
    with pytest.raises(ValueError):
        linear_estimate_ratio(_field(probe_grid, rng), EstimateKind.DISS_INHOM, S)


def test_zero_data_is_rejected(probe_grid):
    zero = Field.zeros(probe_grid)
    with pytest.raises(ZeroNormError):
        linear_estimate_ratio((zero, probe_window(probe_grid, 64)), EstimateKind.AIRY_HOM, S)


def test_projection_ratio(rng):
    grid = make_grid(20.0 * math.pi, 256)
    package = PackageManager().get_package(WeightParams(weight=0.3, speed=1.0), grid)
    F = random_bandlimited(grid, 64, 0.125, rng, xi_max=1.0, tau_max=10.0, t0=-4.0)
    ratio = projection_ratio(F, package, S)
    assert np.isfinite(ratio) and ratio >= 0.0
    with pytest.raises(ZeroNormError):
        projection_ratio(probe_window(grid, 64), package, S)
