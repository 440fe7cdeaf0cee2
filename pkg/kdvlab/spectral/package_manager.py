"""
Package Manager - Singleton cache for spectral packages and time integrators
Packages and integrator coefficients are built on first use and reused for the
lifetime of the process
"""

from typing import Hashable, Optional

import numpy as np
from loguru import logger

from kdvlab.dynamics.integrators import Integrator, Scheme, make_integrator
from kdvlab.spectral.grid import Grid1D
from kdvlab.spectral.linearized_operator import (
    Antiderivative,
    SpectralPackage,
    WeightParams,
    build_spectral_package,
)


class PackageManager:
    """
    Singleton class to manage expensive operator data
    Uses lazy loading - entries are built on first request
    """

    _instance: Optional["PackageManager"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self.packages: dict[tuple, SpectralPackage] = {}
        self.integrators: dict[tuple, Integrator] = {}
        self._initialized = True

    def get_package(
        self,
        params: WeightParams,
        grid: Grid1D,
        antiderivative: Antiderivative = Antiderivative.CLOSED_FORM,
    ) -> SpectralPackage:
        """Get the spectral package for (a, c) on a grid, building it if necessary"""
        key = (params.weight, params.speed, grid, Antiderivative(antiderivative))
        if key not in self.packages:
            logger.info(f"Building spectral package for a={params.weight}, c={params.speed}, N={grid.n_points}")
            self.packages[key] = build_spectral_package(params, grid, antiderivative)
        return self.packages[key]

    def get_integrator(self, key: Hashable, linear: np.ndarray, time_step: float, scheme: Scheme) -> Integrator:
        """
        Get integrator coefficients for a linear part, building them if necessary

        Args:
            key: identifies the linear part (callers encode the parameters it depends on)
            linear: diagonal linear symbol
            time_step: step size
            scheme: integration scheme
        """
        cache_key = (key, float(time_step), Scheme(scheme))
        if cache_key not in self.integrators:
            logger.debug(f"Building {Scheme(scheme).value} coefficients for {key}, dt={time_step}")
            self.integrators[cache_key] = make_integrator(scheme, linear, time_step)
        return self.integrators[cache_key]

    def is_loaded(self) -> bool:
        return bool(self.packages) or bool(self.integrators)

    def clear(self):
        self.packages.clear()
        self.integrators.clear()
        logger.info("Package cache cleared")
