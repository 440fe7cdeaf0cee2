"""
Exponential Time Integrators
Fourth-order schemes for semi-linear systems u' = L u + N(u) with a diagonal
(complex) linear part L

Coefficients depending on L and the step are computed once; the nonlinear
operator is passed to every step so one integrator serves any forcing that
shares the same linear part. phi-function coefficients are evaluated by
contour averages around each z = h L, which is accurate uniformly in z and
exact (RK4) at z = 0.
"""

from enum import Enum
from typing import Callable

import numpy as np

NonlinearOperator = Callable[[np.ndarray], np.ndarray]

CONTOUR_POINTS = 32


class Scheme(str, Enum):
    ETDRK4 = "exponential-integrator-rk4"
    IFRK4 = "integrating-factor-rk4"


def _contour(z: np.ndarray, n_points: int = CONTOUR_POINTS) -> np.ndarray:
    roots = np.exp(2j * np.pi * (np.arange(n_points) + 0.5) / n_points)
    return np.asarray(z, dtype=complex)[..., None] + roots


def phi_functions(z, n_points: int = CONTOUR_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """
    phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2 by contour averaging

    Args:
        z: complex scalar or array
        n_points: contour nodes on the unit circle around each z

    Returns:
        (phi_1, phi_2) with the shape of z
    """
    lr = _contour(z, n_points)
    exp_lr = np.exp(lr)
    phi1 = ((exp_lr - 1.0) / lr).mean(-1)
    phi2 = ((exp_lr - 1.0 - lr) / lr**2).mean(-1)
    return phi1, phi2


class ETDRK4Integrator:
    """ETDRK4 for a diagonal linear part (Cox-Matthews scheme with contour coefficients)"""

    scheme = Scheme.ETDRK4

    def __init__(self, linear: np.ndarray, time_step: float, num_roots_of_unity: int = CONTOUR_POINTS):
        self.time_step = time_step
        self.linear = np.asarray(linear, dtype=complex)
        h = time_step
        self.exp_lin_full = np.exp(h * self.linear)
        self.exp_lin_half = np.exp(0.5 * h * self.linear)

        lr = _contour(h * self.linear, num_roots_of_unity)
        lr_squ = lr**2
        lr_cub = lr**3
        exp_lr = np.exp(lr)
        self.coeff_f0 = h * ((np.exp(lr / 2.0) - 1.0) / lr).mean(-1)
        self.coeff_f1 = h * ((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr_squ)) / lr_cub).mean(-1)
        self.coeff_f2 = h * ((2.0 + lr + exp_lr * (lr - 2.0)) / lr_cub).mean(-1)
        self.coeff_f3 = h * ((-4.0 - 3.0 * lr - lr_squ + exp_lr * (4.0 - lr)) / lr_cub).mean(-1)

    def step(self, states: np.ndarray, nonlinear: NonlinearOperator) -> np.ndarray:
        n_0 = nonlinear(states)
        states_1 = self.exp_lin_half * states + self.coeff_f0 * n_0
        n_1 = nonlinear(states_1)
        states_2 = self.exp_lin_half * states + self.coeff_f0 * n_1
        n_2 = nonlinear(states_2)
        states_3 = self.exp_lin_half * states_1 + self.coeff_f0 * (2.0 * n_2 - n_0)
        n_3 = nonlinear(states_3)
        return (self.exp_lin_full * states + self.coeff_f1 * n_0
                + 2.0 * self.coeff_f2 * (n_1 + n_2) + self.coeff_f3 * n_3)

    def forward_integrate(self, states: np.ndarray, nonlinear: NonlinearOperator, num_step: int = 1) -> np.ndarray:
        for _ in range(num_step):
            states = self.step(states, nonlinear)
        return states


class IFRK4Integrator:
    """Integrating-factor RK4: classical RK4 on e^{-tL} u"""

    scheme = Scheme.IFRK4

    def __init__(self, linear: np.ndarray, time_step: float):
        self.time_step = time_step
        self.linear = np.asarray(linear, dtype=complex)
        self.exp_lin_full = np.exp(time_step * self.linear)
        self.exp_lin_half = np.exp(0.5 * time_step * self.linear)

    def step(self, states: np.ndarray, nonlinear: NonlinearOperator) -> np.ndarray:
        h = self.time_step
        e_half, e_full = self.exp_lin_half, self.exp_lin_full
        k1 = h * nonlinear(states)
        k2 = h * nonlinear(e_half * (states + 0.5 * k1))
        k3 = h * nonlinear(e_half * states + 0.5 * k2)
        k4 = h * nonlinear(e_full * states + e_half * k3)
        return e_full * states + (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4) / 6.0

    def forward_integrate(self, states: np.ndarray, nonlinear: NonlinearOperator, num_step: int = 1) -> np.ndarray:
        for _ in range(num_step):
            states = self.step(states, nonlinear)
        return states


Integrator = ETDRK4Integrator | IFRK4Integrator


def make_integrator(scheme: Scheme, linear: np.ndarray, time_step: float) -> Integrator:
    if Scheme(scheme) == Scheme.ETDRK4:
        return ETDRK4Integrator(linear, time_step)
    return IFRK4Integrator(linear, time_step)
