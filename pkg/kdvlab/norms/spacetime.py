"""
Space-Time Fields and Bourgain Norms
Dyadic (xi, tau - xi^3) shell decompositions and the Besov-refined norms

    ||f||_{X^{s,b,1}} = ( sum_j 2^{2sj} ( sum_k 2^{bk} m_jk )^2 )^{1/2}

with m_jk the L2 mass of the space-time transform on
A_j = {2^j <= <xi> < 2^{j+1}} and B_k = {2^k <= <tau - xi^3> < 2^{k+1}}
(half-open, so the shells partition the lattice).

Transform convention: f~(tau, xi) = dt dx FFT2(f), integrated against
dtau dxi / (2 pi)^2, so that sum_jk m_jk^2 = int int |f|^2 dt dx.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from kdvlab.core.errors import GridError
from kdvlab.spectral.grid import Grid1D


def japanese_bracket(x: np.ndarray) -> np.ndarray:
    """<x> = (1 + |x|^2)^{1/2}"""
    return np.sqrt(1.0 + np.abs(x) ** 2)


def dyadic_index(x: np.ndarray) -> np.ndarray:
    """j with 2^j <= <x> < 2^{j+1}"""
    return np.floor(np.log2(japanese_bracket(x))).astype(int)


def smooth_cutoff(t) -> np.ndarray:
    """
    C-infinity bump: 1 on [-1, 1], 0 outside (-2, 2), monotone in between
    """
    r = np.abs(np.asarray(t, dtype=float))

    def g(s):
        out = np.zeros_like(s)
        positive = s > 0
        out[positive] = np.exp(-1.0 / s[positive])
        return out

    rise = g(2.0 - r)
    return rise / (rise + g(r - 1.0))


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples u(t_n, x_m), t_n = t0 + n dt, on a Grid1D"""

    grid: Grid1D
    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.grid.n_points:
            raise GridError(f"SpaceTimeField needs shape (n_t, {self.grid.n_points}), got {values.shape}")
        n_t = values.shape[0]
        if n_t < 2 or n_t & (n_t - 1):
            raise GridError(f"number of time samples must be a power of two, got {n_t}")
        if not self.dt > 0:
            raise GridError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(values)):
            raise GridError("SpaceTimeField contains NaN or Inf samples")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_slices(cls, grid: Grid1D, dt: float, slices, t0: float = 0.0) -> "SpaceTimeField":
        return cls(grid, dt, np.vstack(list(slices)), t0)

    @property
    def n_t(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_t)

    @property
    def duration(self) -> float:
        return self.n_t * self.dt

    @cached_property
    def transform(self) -> np.ndarray:
        """f~ on the (tau_m, xi_k) lattice in FFT order"""
        return self.dt * self.grid.spacing * np.fft.fft2(self.values)

    @cached_property
    def tau(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_t, d=self.dt)

    @property
    def dtau(self) -> float:
        return 2.0 * np.pi / (self.n_t * self.dt)

    @property
    def cell(self) -> float:
        """dtau dxi / (2 pi)^2"""
        return self.dtau * (np.pi / self.grid.half_length) / (2.0 * np.pi) ** 2

    def l2_norm(self) -> float:
        return float(np.sqrt(self.dt * self.grid.spacing * np.sum(self.values**2)))

    def transform_l2_norm(self) -> float:
        return float(np.sqrt(self.cell * np.sum(np.abs(self.transform) ** 2)))

    def with_values(self, values: np.ndarray) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.dt, values, self.t0)


@dataclass(frozen=True)
class ShellDecomposition:
    """Masses m_jk for j = 0..j_max, k = 0..k_max"""

    masses: np.ndarray

    @property
    def j_max(self) -> int:
        return self.masses.shape[0] - 1

    @property
    def k_max(self) -> int:
        return self.masses.shape[1] - 1

    def total_mass(self) -> float:
        return float(np.sqrt(np.sum(self.masses**2)))

    def norm(self, s: float, b: float) -> float:
        """l2_j(2^{sj}) of l1_k(2^{bk}) over the shell masses"""
        j = np.arange(self.masses.shape[0])
        k = np.arange(self.masses.shape[1])
        inner_sums = self.masses @ (2.0 ** (b * k))
        return float(np.sqrt(np.sum(2.0 ** (2.0 * s * j) * inner_sums**2)))


def decompose_lattice(
    coeffs: np.ndarray,
    tau: np.ndarray,
    xi: np.ndarray,
    cell: float,
    k_cap: Optional[int] = None,
) -> ShellDecomposition:
    """
    Shell masses for transform values on an arbitrary (tau, xi) lattice

    Args:
        coeffs: array indexed [tau, xi]
        tau, xi: lattice coordinates along each axis
        cell: measure of one lattice cell
        k_cap: modulation shells above this index are merged into it
    """
    j = dyadic_index(xi)[None, :] * np.ones((tau.size, 1), dtype=int)
    k = dyadic_index(tau[:, None] - xi[None, :] ** 3)
    if k_cap is not None:
        k = np.minimum(k, k_cap)
    masses = np.zeros((int(j.max()) + 1, int(k.max()) + 1))
    np.add.at(masses, (j.ravel(), k.ravel()), cell * np.abs(coeffs.ravel()) ** 2)
    return ShellDecomposition(np.sqrt(masses))


def shell_decompose(F: SpaceTimeField, k_cap: Optional[int] = None) -> ShellDecomposition:
    """Masses of F~ over the shells A_j x B_k of its own lattice"""
    return decompose_lattice(F.transform, F.tau, F.grid.frequencies, F.cell, k_cap)


def xsb1_norm(F: SpaceTimeField, s: float, sign: int = 1) -> float:
    """X^{s, +-1/2, 1} norm; sign selects b = +1/2 or b = -1/2"""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return shell_decompose(F).norm(s, 0.5 * sign)


def xsb_norm(F: SpaceTimeField, s: float, b: float) -> float:
    """Classical X^{s,b} norm ||<xi>^s <tau - xi^3>^b f~||_{L2}"""
    xi = F.grid.frequencies[None, :]
    weight = japanese_bracket(xi) ** (2 * s) * japanese_bracket(F.tau[:, None] - xi**3) ** (2 * b)
    return float(np.sqrt(F.cell * np.sum(weight * np.abs(F.transform) ** 2)))


def dilation_widths(duration: float, n_ext: int) -> np.ndarray:
    """Geometric sweep mu_i = T 2^{-i/2}, i = 0..n_ext-1"""
    return duration * 2.0 ** (-0.5 * np.arange(n_ext))


def timelocalized_norm(F: SpaceTimeField, delta: float, s: float, n_ext: int = 8) -> float:
    """
    Upper bound for inf ||G||_{X^{s,1/2,1}} over G = F on [0, delta]

    Candidates are F itself and the dilated cutoffs rho(t / mu) F for the
    sweep widths mu >= delta (rho = 1 on [-1, 1], so each candidate agrees
    with F on [0, delta]). The sweep does not depend on delta, so shrinking
    delta only enlarges the candidate set.
    """
    if delta > F.duration:
        raise ValueError(f"delta={delta} exceeds the window length {F.duration}")
    best = xsb1_norm(F, s, 1)
    for mu in dilation_widths(F.duration, n_ext):
        if mu < delta:
            continue
        candidate = F.with_values(smooth_cutoff(F.times / mu)[:, None] * F.values)
        best = min(best, xsb1_norm(candidate, s, 1))
    return best


def random_bandlimited(
    grid: Grid1D,
    n_t: int,
    dt: float,
    rng: np.random.Generator,
    xi_max: float,
    tau_max: float,
    t0: float = 0.0,
) -> SpaceTimeField:
    """
    Real random trigonometric polynomial with |xi| <= xi_max and |tau| <= tau_max

    The coefficients are drawn on the integer mode indices of the lattice,
    whose spacings pi / L and 2 pi / (n_t dt) do not depend on the resolution,
    so the same seed gives the same continuous field at any (N, n_t) that
    resolves the band.
    """
    k_max = int(np.floor(xi_max * grid.half_length / np.pi))
    m_max = int(np.floor(tau_max * n_t * dt / (2.0 * np.pi)))
    if 2 * k_max >= grid.n_points or 2 * m_max >= n_t:
        raise GridError("lattice too coarse for the requested band")
    shape = (2 * m_max + 1, 2 * k_max + 1)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spectrum = np.zeros((n_t, grid.n_points), dtype=complex)
    rows = np.arange(-m_max, m_max + 1) % n_t
    cols = np.arange(-k_max, k_max + 1) % grid.n_points
    spectrum[np.ix_(rows, cols)] = coeffs
    # phases referenced to t = t0 and x = -L
    values = np.fft.ifft2(spectrum).real * (n_t * grid.n_points)
    return SpaceTimeField(grid, dt, values, t0)


def gaussian_packet(grid: Grid1D, width: float = 3.0, center: float = 0.0, wavenumber: float = 0.0) -> np.ndarray:
    """exp(-(x - x0)^2 / width^2) cos(k (x - x0))"""
    x = grid.points - center
    return np.exp(-(x / width) ** 2) * np.cos(wavenumber * x)


def probe_window(grid: Grid1D, n_t: int, duration: float = 8.0) -> SpaceTimeField:
    """Zero field on the symmetric time window [-duration/2, duration/2)"""
    dt = duration / n_t
    return SpaceTimeField(grid, dt, np.zeros((n_t, grid.n_points)), -0.5 * duration)
