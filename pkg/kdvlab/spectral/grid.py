"""
Spectral Grid
Uniform periodic grid on [-L, L), discrete Fourier transforms, spectral
differentiation and 2/3-rule dealiasing

Transform convention: forward transform unnormalized (numpy ``fft``), inverse
divided by N. Quadratures use the weight dx = 2L/N, so that
``dx * sum(|f|^2) == (2L / N^2) * sum(|f_hat|^2)``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize

from kdvlab.core.errors import GridError, NonFiniteFieldError


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with N points on [-L, L)"""

    half_length: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.half_length) or self.half_length <= 0:
            raise GridError(f"half_length must be positive, got {self.half_length}")
        if int(self.n_points) != self.n_points or not _is_power_of_two(int(self.n_points)):
            raise GridError(f"n_points must be a power of two, got {self.n_points}")
        if self.n_points < 16:
            raise GridError(f"n_points must be at least 16, got {self.n_points}")

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    @cached_property
    def spacing(self) -> float:
        return self.length / self.n_points

    @cached_property
    def points(self) -> np.ndarray:
        y = -self.half_length + self.spacing * np.arange(self.n_points)
        y.flags.writeable = False
        return y

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer indices k in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1)"""
        k = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(int)
        k.flags.writeable = False
        return k

    @cached_property
    def frequencies(self) -> np.ndarray:
        """xi_k = pi k / L in FFT order"""
        xi = np.pi * self.wavenumbers / self.half_length
        xi.flags.writeable = False
        return xi

    @cached_property
    def monotone_frequencies(self) -> np.ndarray:
        return np.fft.fftshift(self.frequencies)

    @property
    def max_frequency(self) -> float:
        return float(np.max(np.abs(self.frequencies)))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a Grid1D"""

    grid: Grid1D
    values: np.ndarray

    # numpy scalars defer to the Field operators
    __array_ufunc__ = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise GridError(f"Field needs {self.grid.n_points} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteFieldError("Field contains NaN or Inf samples")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> "Field":
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(grid, np.zeros(grid.n_points))

    def to_spectral(self) -> "SpectralField":
        return to_spectral(self)

    def l2_norm(self) -> float:
        return l2_norm(self)

    def h1_norm(self) -> float:
        return h1_norm(self)

    def inner(self, other: "Field") -> float:
        return inner(self, other)

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise GridError("Fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return Field(self.grid, self.values / scalar)

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Discrete Fourier coefficients (FFT order) of a field on a Grid1D"""

    grid: Grid1D
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n_points,):
            raise GridError(f"SpectralField needs {self.grid.n_points} coefficients, got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    def to_field(self) -> Field:
        return from_spectral(self)


def make_grid(half_length: float, n_points: int) -> Grid1D:
    """
    Build a periodic grid on [-L, L)

    Args:
        half_length: L > 0
        n_points: N, a power of two not smaller than 16

    Returns:
        Grid1D with spacing 2L/N and frequencies pi k / L
    """
    return Grid1D(float(half_length), int(n_points))


def to_spectral(f: Field) -> SpectralField:
    return SpectralField(f.grid, np.fft.fft(f.values))


def from_spectral(f_hat: SpectralField) -> Field:
    return Field(f_hat.grid, np.fft.ifft(f_hat.coeffs).real)


def symbol_multiply(f: Field, symbol: np.ndarray) -> Field:
    """Apply a Fourier multiplier given in FFT order and return the real part"""
    return Field(f.grid, np.fft.ifft(symbol * np.fft.fft(f.values)).real)


def derivative_symbol(grid: Grid1D, order: int, shift: float = 0.0) -> np.ndarray:
    """
    Symbol (i xi - shift)^order in FFT order

    For odd orders of the plain derivative the Nyquist entry is zeroed so that
    real fields map to real fields.
    """
    xi = grid.frequencies.copy()
    if order % 2 == 1 and shift == 0.0:
        xi[grid.n_points // 2] = 0.0
    return (1j * xi - shift) ** order


def spectral_derivative(f: Field, order: int = 1) -> Field:
    """
    Spectral derivative of a band-limited field

    The caller is responsible for f being resolved well below the Nyquist
    frequency; aliasing is not detected.

    Args:
        f: field to differentiate
        order: non-negative derivative order

    Returns:
        Field with coefficients multiplied by (i xi_k)^order
    """
    if order < 0:
        raise ValueError(f"derivative order must be non-negative, got {order}")
    if order == 0:
        return f
    return symbol_multiply(f, derivative_symbol(f.grid, order))


def shifted_derivative(f: Field, a: float, order: int = 1) -> Field:
    """(d/dy - a)^order f, the conjugation e^{ay} d/dy e^{-ay} applied spectrally"""
    if a == 0.0:
        return spectral_derivative(f, order)
    return symbol_multiply(f, derivative_symbol(f.grid, order, shift=a))


def shifted_antiderivative(f: Field, a: float) -> Field:
    """
    (d/dy + a)^{-1} f for a > 0

    For f = e^{-ay} h this is e^{-ay} times the running integral of h, with
    no exponential weight formed on the grid. Accurate while the result
    decays at both window ends.
    """
    if a <= 0.0:
        raise GridError(f"shifted antiderivative needs a > 0, got {a}")
    return symbol_multiply(f, 1.0 / derivative_symbol(f.grid, 1, shift=-a))


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """True for modes kept by the 2/3 rule (|k| <= N/3)"""
    return np.abs(grid.wavenumbers) <= grid.n_points // 3


def dealias(f_hat: SpectralField) -> SpectralField:
    """Zero every coefficient with |k| > N/3"""
    return SpectralField(f_hat.grid, np.where(dealias_mask(f_hat.grid), f_hat.coeffs, 0.0))


def inner(f: Field, g: Field) -> float:
    """Discrete L2 inner product dx * sum(f g)"""
    return float(f.grid.spacing * np.dot(f.values, g.values))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.spacing * np.dot(f.values, f.values)))


def h1_norm(f: Field) -> float:
    df = spectral_derivative(f, 1)
    return float(np.sqrt(l2_norm(f) ** 2 + l2_norm(df) ** 2))


def spectral_l2_norm(f_hat: SpectralField) -> float:
    """L2 norm from coefficients, (2L / N^2) sum |f_hat|^2"""
    grid = f_hat.grid
    return float(np.sqrt(grid.length / grid.n_points**2 * np.sum(np.abs(f_hat.coeffs) ** 2)))


def shift(f: Field, d: float) -> Field:
    """Fourier translation: returns g(y) = f(y + d)"""
    return symbol_multiply(f, np.exp(1j * f.grid.frequencies * d))


def cumulative_integral(f: Field) -> Field:
    """Running integral from the left grid edge, integrand taken as zero outside the grid"""
    return Field(f.grid, integrate.cumulative_trapezoid(f.values, dx=f.grid.spacing, initial=0.0))


def evaluate(f: Field, y: float, order: int = 0) -> float:
    """Evaluate the trigonometric interpolant of f (or a derivative) at an arbitrary point"""
    grid = f.grid
    coeffs = np.fft.fft(f.values) * derivative_symbol(grid, order)
    phase = np.exp(1j * grid.frequencies * (y + grid.half_length))
    return float((coeffs @ phase).real / grid.n_points)


def peak_location(f: Field) -> float:
    """Location of the maximum of the interpolant, refined to machine precision"""
    grid = f.grid
    m = int(np.argmax(f.values))
    left = grid.points[m] - grid.spacing
    right = grid.points[m] + grid.spacing
    slope_left = evaluate(f, left, 1)
    slope_right = evaluate(f, right, 1)
    if slope_left <= 0 or slope_right >= 0:
        return float(grid.points[m])
    return float(optimize.brentq(lambda y: evaluate(f, y, 1), left, right, xtol=1e-14))


def boundary_tail(f: Field) -> float:
    """Largest absolute sample at the two ends of the periodic window"""
    return float(max(abs(f.values[0]), abs(f.values[-1])))


def hs_norm(f: Field, s: float) -> float:
    """Sobolev norm with weight <xi>^s = (1 + xi^2)^{s/2}, from the coefficients"""
    grid = f.grid
    weights = (1.0 + grid.frequencies**2) ** s
    coeffs = np.fft.fft(f.values)
    return float(np.sqrt(grid.length / grid.n_points**2 * np.sum(weights * np.abs(coeffs) ** 2)))
