import numpy as np

from kdvlab.dynamics.integrators import ETDRK4Integrator, IFRK4Integrator, Scheme
from kdvlab.spectral.linearized_operator import WeightParams
from kdvlab.spectral.package_manager import PackageManager


def test_singleton():
    assert PackageManager() is PackageManager()


def test_package_is_cached(coarse_grid):
    manager = PackageManager()
    params = WeightParams(weight=0.25, speed=1.0)
    first = manager.get_package(params, coarse_grid)
    assert manager.get_package(WeightParams(weight=0.25, speed=1.0), coarse_grid) is first
    assert manager.is_loaded()


def test_integrators_keyed_by_step_and_scheme():
    manager = PackageManager()
    linear = 1j * np.arange(8.0) ** 3
    etd = manager.get_integrator("cache-test", linear, 0.01, Scheme.ETDRK4)
    assert isinstance(etd, ETDRK4Integrator)
    assert manager.get_integrator("cache-test", linear, 0.01, Scheme.ETDRK4) is etd
    assert manager.get_integrator("cache-test", linear, 0.02, Scheme.ETDRK4) is not etd
    assert isinstance(manager.get_integrator("cache-test", linear, 0.01, Scheme.IFRK4), IFRK4Integrator)


def test_clear(coarse_grid):
    manager = PackageManager()
    manager.get_package(WeightParams(weight=0.1, speed=1.0), coarse_grid)
    manager.clear()
    assert not manager.is_loaded()
