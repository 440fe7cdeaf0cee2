"""Shared fixtures"""

import math

import numpy as np
import pytest

from kdvlab.spectral.grid import make_grid
from kdvlab.spectral.linearized_operator import WeightParams
from kdvlab.spectral.package_manager import PackageManager


@pytest.fixture
def line_grid():
    """Default truncation of the line: L = 20 pi, N = 1024"""
    return make_grid(20.0 * math.pi, 1024)


@pytest.fixture
def coarse_grid():
    """L = 20 pi, N = 256: resolves psi_1 for the dense and ensemble tests"""
    return make_grid(20.0 * math.pi, 256)


@pytest.fixture
def circle_grid():
    return make_grid(math.pi, 16)


@pytest.fixture
def weight_params():
    return WeightParams(weight=0.3, speed=1.0)


@pytest.fixture
def package(weight_params, line_grid):
    return PackageManager().get_package(weight_params, line_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
