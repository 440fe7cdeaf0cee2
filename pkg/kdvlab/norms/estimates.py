"""
Estimate Probes
Empirical ratios for the embedding, linear, bilinear and projection estimates
on the X^{s,b,1} scale

Each probe returns the measured ratio left side / right side. Constants are
measured, never assumed.
"""

from enum import Enum
from typing import Optional

import numpy as np

from kdvlab.core.errors import ZeroNormError
from kdvlab.dynamics.integrators import phi_functions
from kdvlab.norms.spacetime import (
    SpaceTimeField,
    decompose_lattice,
    shell_decompose,
    smooth_cutoff,
    xsb1_norm,
)
from kdvlab.spectral.grid import Field, Grid1D, hs_norm
from kdvlab.spectral.linearized_operator import SpectralPackage, WeightParams


class EstimateKind(str, Enum):
    AIRY_HOM = "airy-hom"
    AIRY_INHOM = "airy-inhom"
    DISS_HOM = "diss-hom"
    DISS_INHOM = "diss-inhom"


def _ratio(numerator: float, denominator: float, what: str) -> float:
    if denominator == 0.0:
        raise ZeroNormError(f"{what}: vanishing denominator")
    return float(numerator / denominator)


# --- embedding -------------------------------------------------------------------

def embedding_constant(s: float, dtau: float) -> float:
    """
    Bound on sup_t ||F(t)||_{H^s} / ||F||_{X^{s,1/2,1}} for the discrete transform

    Cauchy-Schwarz over each modulation shell, whose tau-extent is below
    2^{k+2} (plus two lattice cells), gives 2^{max(s,0)} sqrt(2/pi) sqrt(1 + dtau/2).
    """
    return 2.0 ** max(s, 0.0) * np.sqrt(2.0 / np.pi) * np.sqrt(1.0 + 0.5 * dtau)


def embedding_ratio(F: SpaceTimeField, s: float) -> float:
    """sup_n ||F(t_n)||_{H^s} / ||F||_{X^{s,1/2,1}}"""
    sup = max(hs_norm(Field(F.grid, row), s) for row in F.values)
    return _ratio(sup, xsb1_norm(F, s, 1), "embedding ratio")


# --- bilinear --------------------------------------------------------------------

def _monotone_axis(values: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(values)


def bilinear_convolution(f: SpaceTimeField, g: SpaceTimeField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (|xi_1| f~) * g~ on the padded lattice

    Both transforms are moved to monotone order and zero-padded to
    (2 n_t - 1, 2N - 1), so the FFT product is the linear convolution.

    Returns:
        (values indexed [tau, xi], tau coordinates, xi coordinates)
    """
    if f.grid != g.grid or f.dt != g.dt or f.n_t != g.n_t:
        raise ValueError("bilinear probe needs fields on the same space-time lattice")
    tau = _monotone_axis(f.tau)
    xi = _monotone_axis(f.grid.frequencies)
    a = np.fft.fftshift(f.transform) * np.abs(xi)[None, :]
    b = np.fft.fftshift(g.transform)
    shape = (2 * f.n_t - 1, 2 * f.grid.n_points - 1)
    conv = np.fft.ifft2(np.fft.fft2(a, shape) * np.fft.fft2(b, shape))
    conv *= f.cell
    tau_out = 2.0 * tau[0] + f.dtau * np.arange(shape[0])
    xi_out = 2.0 * xi[0] + (np.pi / f.grid.half_length) * np.arange(shape[1])
    return conv, tau_out, xi_out


def bilinear_ratio(f: SpaceTimeField, g: SpaceTimeField, s: float) -> float:
    """||(|xi_1| f~) * g~||_{X^{s,-1/2,1}} / (||f||_{X^{s,1/2,1}} ||g||_{X^{s,1/2,1}})"""
    if s < 0:
        raise ValueError(f"bilinear estimate needs s >= 0, got {s}")
    conv, tau, xi = bilinear_convolution(f, g)
    left = decompose_lattice(conv, tau, xi, f.cell).norm(s, -0.5)
    return _ratio(left, xsb1_norm(f, s, 1) * xsb1_norm(g, s, 1), "bilinear ratio")


def resonance_defect(tau1, xi1, tau2, xi2) -> np.ndarray:
    """|(tau1+tau2) - (xi1+xi2)^3 - (tau1 - xi1^3) - (tau2 - xi2^3) + 3 xi xi1 xi2|"""
    tau1, xi1, tau2, xi2 = (np.asarray(x, dtype=float) for x in (tau1, xi1, tau2, xi2))
    xi = xi1 + xi2
    lhs = (tau1 + tau2) - xi**3 - (tau1 - xi1**3) - (tau2 - xi2**3)
    return np.abs(lhs + 3.0 * xi * xi1 * xi2)


# --- linear estimates ----------------------------------------------------------------

def _group_exponent(grid: Grid1D, params: Optional[WeightParams]) -> tuple[np.ndarray, np.ndarray]:
    """(i xi^3, p_a(xi)) with p = 0 for the Airy group"""
    xi = grid.frequencies.copy()
    xi[grid.n_points // 2] = 0.0
    dispersion = 1j * xi**3
    if params is None:
        return dispersion, np.zeros(grid.n_points)
    p = 3.0 * params.weight * grid.frequencies**2 + params.weight * (params.speed - params.weight**2)
    return dispersion, p


def free_evolution(f: Field, times: np.ndarray, params: Optional[WeightParams] = None) -> np.ndarray:
    """Rows e^{i t xi^3 - p_a |t|} f for each t"""
    dispersion, p = _group_exponent(f.grid, params)
    f_hat = np.fft.fft(f.values)
    symbols = np.exp(times[:, None] * dispersion[None, :] - np.abs(times)[:, None] * p[None, :])
    return np.fft.ifft(symbols * f_hat[None, :], axis=1).real


def duhamel_response(forcing: SpaceTimeField, params: Optional[WeightParams] = None) -> SpaceTimeField:
    """
    D(t) = int_0^t W(t - t') F(t') dt' on the forcing's window

    W is the Airy group (params None) or the two-sided dissipative group
    e^{i t xi^3 - p_a |t|}. Each Fourier mode is integrated exactly for forcing
    linear between samples; times before 0 are reached by the same recursion
    run backwards from t = 0, which must be a sample time.
    """
    times = forcing.times
    zero = np.flatnonzero(np.isclose(times, 0.0, atol=1e-12 * forcing.dt))
    if zero.size != 1:
        raise ValueError("duhamel_response needs t = 0 on the time lattice")
    n0 = int(zero[0])
    h = forcing.dt
    dispersion, p = _group_exponent(forcing.grid, params)
    forcing_hat = np.fft.fft(forcing.values, axis=1)
    response = np.zeros_like(forcing_hat)

    def march(rate: np.ndarray, indices: range, sign: float):
        z = rate * h
        propagator = np.exp(z)
        phi1, phi2 = phi_functions(z)
        w_old = h * (phi1 - phi2)
        w_new = h * phi2
        previous = n0
        for n in indices:
            response[n] = (propagator * response[previous]
                           + sign * (w_old * forcing_hat[previous] + w_new * forcing_hat[n]))
            previous = n

    # forward: D' = (i xi^3 - p) D + F
    march(dispersion - p, range(n0 + 1, forcing.n_t), 1.0)
    # backward in s = -t: E' = -(i xi^3 + p) E - F(-s)
    march(-(dispersion + p), range(n0 - 1, -1, -1), -1.0)
    return forcing.with_values(np.fft.ifft(response, axis=1).real)


def linear_estimate_ratio(
    data,
    kind: EstimateKind,
    s: float,
    params: Optional[WeightParams] = None,
) -> float:
    """
    Left side over right side of the linear estimates with the cutoff rho(t)

      airy-hom / diss-hom:     ||rho W(t) f||_{X^{s,1/2,1}} / ||f||_{H^s}
      airy-inhom / diss-inhom: ||rho int_0^t W(t-t') F||_{X^{s,1/2,1}} / ||F||_{X^{s,-1/2,1}}

    Args:
        data: (f, window) with f a Field and window a SpaceTimeField template for
            the homogeneous kinds; the forcing SpaceTimeField for the inhomogeneous kinds
        kind: estimate kind
        s: regularity index
        params: weight and speed for the dissipative kinds (a = 0 gives the Airy group)
    """
    kind = EstimateKind(kind)
    dissipative = kind in (EstimateKind.DISS_HOM, EstimateKind.DISS_INHOM)
    if dissipative and params is None:
        raise ValueError(f"{kind.value} needs WeightParams")
    group = params if dissipative else None

    if kind in (EstimateKind.AIRY_HOM, EstimateKind.DISS_HOM):
        f, window = data
        evolved = free_evolution(f, window.times, group)
        lifted = window.with_values(smooth_cutoff(window.times)[:, None] * evolved)
        return _ratio(xsb1_norm(lifted, s, 1), hs_norm(f, s), f"{kind.value} ratio")

    forcing: SpaceTimeField = data
    response = duhamel_response(forcing, group)
    lifted = response.with_values(smooth_cutoff(response.times)[:, None] * response.values)
    return _ratio(xsb1_norm(lifted, s, 1), xsb1_norm(forcing, s, -1), f"{kind.value} ratio")


def projection_ratio(F: SpaceTimeField, pkg: SpectralPackage, s: float) -> float:
    """||P F||_{X^{s,-1/2,1}} / ||F||_{X^{s,-1/2,1}} with P applied at every time"""
    if pkg.grid != F.grid:
        raise ValueError("package and field live on different grids")
    eta = np.vstack([pkg.eta1.values, pkg.eta2.values])
    zeta = np.vstack([pkg.zeta1.values, pkg.zeta2.values])
    coefficients = F.grid.spacing * F.values @ eta.T
    projected = F.with_values(coefficients @ zeta)
    return _ratio(xsb1_norm(projected, s, -1), xsb1_norm(F, s, -1), "projection ratio")


def shell_parseval_defect(F: SpaceTimeField) -> float:
    """Relative gap between the shell masses and the space-time L2 norm"""
    total = F.l2_norm()
    if total == 0.0:
        return 0.0
    return abs(shell_decompose(F).total_mass() - total) / total
