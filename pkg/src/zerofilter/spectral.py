"""Periodic grid, discrete Fourier transforms and Fourier multipliers.

Fields live on the uniform grid ``x_j = -L + j*dx`` of the periodic box
``[-L, L)``.  Their coefficients discretize the continuous transform
``F(f)(xi) = int exp(-i x xi) f(x) dx`` at the frequencies ``xi_k = k*pi/L``,
so that Plancherel reads ``int f^2 dx = sum |F_k|^2 / (2L)``.

Coefficient arrays are stored in the usual FFT ordering (``k = 0, 1, ...,
N/2-1, -N/2, ..., -1``).  The unmatched mode ``k = -N/2`` is zero in every
:class:`SpectralField`.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, SymmetryError

DEFAULT_DEALIAS = 2.0 / 3.0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)`` with ``N`` points."""

    L: float
    N: int

    def __post_init__(self):
        N = int(self.N)
        if N < 16 or N & (N - 1):
            raise ConfigurationError(f"grid size N must be a power of two >= 16, got {self.N}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ConfigurationError(f"half-length L must be positive, got {self.L}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        """Frequency spacing ``pi / L``."""
        return np.pi / self.L

    @cached_property
    def x(self) -> np.ndarray:
        return _frozen(-self.L + self.dx * np.arange(self.N))

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        return _frozen(np.fft.fftfreq(self.N, 1.0 / self.N).astype(np.int64))

    @cached_property
    def xi(self) -> np.ndarray:
        return _frozen(self.k * self.dxi)

    @cached_property
    def phase(self) -> np.ndarray:
        # exp(i xi_k L) = (-1)^k accounts for the grid starting at -L
        return _frozen(np.where(self.k % 2 == 0, 1.0, -1.0))

    @property
    def nyquist_index(self) -> int:
        return self.N // 2

    @property
    def max_frequency(self) -> float:
        """Largest retained |xi|, i.e. ``(N/2 - 1) * pi / L``."""
        return (self.N // 2 - 1) * self.dxi

    def cutoff_frequency(self, rule: float = DEFAULT_DEALIAS) -> float:
        """Largest frequency kept by :func:`dealias` with the given rule."""
        return np.floor(rule * self.N / 2) * self.dxi

    @cached_property
    def _mirror(self) -> np.ndarray:
        return (-np.arange(self.N)) % self.N


def _frozen(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def dft_forward(values, grid: Grid) -> np.ndarray:
    """Discrete Fourier coefficients of grid samples."""
    values = np.asarray(values)
    if values.shape != (grid.N,):
        raise ConfigurationError(f"expected {grid.N} samples, got shape {values.shape}")
    return grid.dx * grid.phase * np.fft.fft(values)


def dft_inverse(coeffs, grid: Grid, *, check: bool = True) -> np.ndarray:
    """Real grid samples from conjugate-symmetric coefficients.

    Raises :class:`SymmetryError` if the coefficients deviate from conjugate
    symmetry by more than 1e-9 relative to their largest magnitude.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (grid.N,):
        raise ConfigurationError(f"expected {grid.N} coefficients, got shape {coeffs.shape}")
    if check:
        _check_symmetry(coeffs, grid)
    return np.fft.ifft(coeffs * grid.phase).real / grid.dx


def _check_symmetry(coeffs, grid):
    scale = np.max(np.abs(coeffs), initial=0.0)
    asym = np.max(np.abs(coeffs - np.conj(coeffs[grid._mirror])), initial=0.0)
    if asym > 1e-9 * scale:
        raise SymmetryError(f"coefficients are not conjugate-symmetric (defect {asym / scale:.3e})")


class SpectralField:
    """Real field on a :class:`Grid` together with its Fourier coefficients.

    Instances are immutable; both arrays are read-only and always consistent.
    Build them with :meth:`from_values` or :meth:`from_coeffs`.
    """

    __slots__ = ("grid", "values", "coeffs")

    def __init__(self, grid: Grid, values: np.ndarray, coeffs: np.ndarray):
        self.grid = grid
        self.values = _frozen(values)
        self.coeffs = _frozen(coeffs)

    @classmethod
    def from_values(cls, grid: Grid, values) -> "SpectralField":
        """Field from samples; the unmatched Nyquist mode is projected out."""
        values = np.asarray(values, dtype=float)
        coeffs = dft_forward(values, grid)
        nyq = abs(coeffs[grid.nyquist_index])
        coeffs[grid.nyquist_index] = 0.0
        # re-synthesize only when the Nyquist content is more than roundoff
        if nyq > 1e-13 * max(np.abs(coeffs).max(), np.finfo(float).tiny):
            values = dft_inverse(coeffs, grid, check=False)
        return cls(grid, values.copy(), coeffs)

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs, *, check: bool = True) -> "SpectralField":
        coeffs = np.array(coeffs, dtype=complex)
        if check:
            _check_symmetry(coeffs, grid)
        coeffs[grid.nyquist_index] = 0.0
        # symmetrize so that coeffs is exactly the transform of real values
        coeffs = 0.5 * (coeffs + np.conj(coeffs[grid._mirror]))
        return cls(grid, dft_inverse(coeffs, grid, check=False), coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.N), np.zeros(grid.N, dtype=complex))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "SpectralField":
        return cls.from_values(grid, func(grid.x))

    def _check_grid(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.values + other.values, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.values - other.values, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.values, -self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar) and np.isreal(scalar):
            scalar = float(scalar)
            return SpectralField(self.grid, scalar * self.values, scalar * self.coeffs)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __repr__(self):
        return f"SpectralField(N={self.grid.N}, L={self.grid.L:g}, max|u|={self.max_abs():.3g})"

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        """L2 norm by the rectangle rule (spectrally accurate on the periodic grid)."""
        return float(np.sqrt(self.grid.dx * np.dot(self.values, self.values)))

    def spectral_l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) / (2.0 * self.grid.L)))

    def apply_multiplier(self, symbol) -> "SpectralField":
        """Multiply the coefficients by ``symbol`` sampled on the grid frequencies.

        ``symbol`` must be even in xi for real symbols or odd for imaginary ones;
        the result is re-symmetrized and the Nyquist mode is zeroed.
        """
        coeffs = self.coeffs * symbol
        coeffs[self.grid.nyquist_index] = 0.0
        return SpectralField(self.grid, dft_inverse(coeffs, self.grid, check=False), coeffs)


def derivative(u: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative of order 1, 2 or 3."""
    if order not in (1, 2, 3):
        raise ConfigurationError(f"unsupported derivative order {order!r}; use 1, 2 or 3")
    return u.apply_multiplier((1j * u.grid.xi) ** order)


def resolvent_symbol(xi, alpha: float):
    """Symbol ``1 / (1 + alpha^2 xi^2)`` of ``(1 - alpha^2 d_x^2)^{-1}``."""
    return 1.0 / (1.0 + (alpha * np.asarray(xi)) ** 2)


def resolvent(u: SpectralField, alpha: float) -> SpectralField:
    """Apply the Helmholtz resolvent ``(1 - alpha^2 d_x^2)^{-1}``."""
    if alpha < 0:
        raise ConfigurationError(f"alpha must be non-negative, got {alpha}")
    if alpha == 0:
        return u
    return u.apply_multiplier(resolvent_symbol(u.grid.xi, alpha))


def dealias_mask(grid: Grid, rule: float = DEFAULT_DEALIAS) -> np.ndarray:
    if not 0 < rule <= 1:
        raise ConfigurationError(f"dealias rule must lie in (0, 1], got {rule}")
    mask = np.abs(grid.k) <= rule * grid.N / 2
    mask[grid.nyquist_index] = False
    return mask


def dealias(u: SpectralField, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """Zero every mode with ``|k| > rule * N / 2``."""
    return u.apply_multiplier(dealias_mask(u.grid, rule))


def product(u: SpectralField, v: SpectralField, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """Dealiased pointwise product."""
    u._check_grid(v)
    return dealias(SpectralField.from_values(u.grid, u.values * v.values), rule)


class SymbolBounds(NamedTuple):
    alpha: float
    m1: float
    m2: float
    m3: float


def symbol_bounds_check(grid: Grid, alpha: float) -> SymbolBounds:
    """Maxima over the grid of the three resolvent-derived multipliers.

    ``m1 = a^2 xi^2 / (1 + a^2 xi^2)``, ``m2 = |a xi| / (1 + a^2 xi^2)`` and
    ``m3 = a^2 |xi| (1 + xi^2)^{1/2} / (1 + a^2 xi^2)``.
    """
    if alpha <= 0:
        raise ConfigurationError("symbol bounds need alpha > 0")
    xi = np.abs(grid.xi)
    den = 1.0 + (alpha * xi) ** 2
    m1 = (alpha * xi) ** 2 / den
    m2 = alpha * xi / den
    m3 = alpha**2 * xi * np.sqrt(1.0 + xi**2) / den
    return SymbolBounds(alpha, float(m1.max()), float(m2.max()), float(m3.max()))
