"""Dyadic Littlewood-Paley blocks and nonhomogeneous Besov norms on a grid.

The low-frequency cutoff ``chi`` equals 1 on ``|xi| <= 3/4`` and vanishes for
``|xi| >= 4/3``; the annulus function is ``phi(xi) = chi(xi/2) - chi(xi)``,
supported in ``3/4 <= |xi| <= 8/3``.  With this choice the sum
``chi + sum_{j>=0} phi(2^-j xi)`` telescopes to exactly one.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .spectral import DEFAULT_DEALIAS, Grid, SpectralField, dealias, derivative, product

CHI_PLATEAU = 3.0 / 4.0
CHI_SUPPORT = 4.0 / 3.0


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, ``h(t)/(h(t)+h(1-t))`` between."""
    t = np.asarray(t, dtype=float)
    a, b = _h(t), _h(1.0 - t)
    return a / (a + b)


def chi(xi):
    return 1.0 - smooth_step((np.abs(xi) - CHI_PLATEAU) / (CHI_SUPPORT - CHI_PLATEAU))


def phi(xi):
    xi = np.asarray(xi, dtype=float)
    return chi(0.5 * xi) - chi(xi)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """Partition of unity sampled on a grid.

    ``weights[0]`` is ``chi(xi_k)`` (block ``j = -1``) and ``weights[j + 1]`` is
    ``phi(2^-j xi_k)`` for ``j = 0 .. j_max``.
    """

    grid: Grid
    weights: np.ndarray
    j_max: int
    recipe: dict = field(default_factory=dict)

    j_min = -1

    @property
    def chi(self) -> np.ndarray:
        return self.weights[0]

    @property
    def phi(self) -> np.ndarray:
        return self.weights[1]

    @property
    def indices(self) -> range:
        return range(-1, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        if j <= -2 or j > self.j_max:
            return np.zeros(self.grid.N)
        return self.weights[j + 1]


@lru_cache(maxsize=32)
def build_partition(grid: Grid) -> DyadicPartition:
    """Sample ``chi`` and ``phi(2^-j .)`` on ``grid`` for all blocks it can see."""
    xi_max = grid.N // 2 * grid.dxi
    if xi_max < CHI_SUPPORT or grid.dxi > 8.0 / 3.0 - CHI_PLATEAU:
        raise ConfigurationError(f"grid (L={grid.L:g}, N={grid.N}) is too coarse to host the j = 0 annulus")
    # smallest j_max with chi(2^-(j_max+1) xi) = 1 on the whole grid
    j_max = max(0, math.ceil(math.log2(xi_max / CHI_PLATEAU)) - 1)
    xi = np.abs(grid.xi)
    lows = [chi(xi * 2.0**-j) for j in range(0, j_max + 2)]
    rows = [lows[0]] + [lows[j + 1] - lows[j] for j in range(j_max + 1)]
    weights = np.vstack(rows)
    weights.setflags(write=False)
    recipe = {
        "chi": "1 - psi((|xi| - 3/4) / (4/3 - 3/4)), psi(t) = h(t)/(h(t)+h(1-t)), h(t) = exp(-1/t)",
        "phi": "chi(xi/2) - chi(xi)",
        "j_max": j_max,
    }
    return DyadicPartition(grid, weights, j_max, recipe)


def _partition(u: SpectralField, part):
    if part is None:
        return build_partition(u.grid)
    if part.grid != u.grid:
        raise ConfigurationError("partition was built for a different grid")
    return part


def block(u: SpectralField, j: int, part: DyadicPartition = None) -> SpectralField:
    """Littlewood-Paley block ``Delta_j u``; zero for ``j <= -2``."""
    part = _partition(u, part)
    return u.apply_multiplier(part.multiplier(j))


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    blocks: list
    j_min: int = -1

    def reconstruct(self) -> SpectralField:
        total = self.blocks[0]
        for b in self.blocks[1:]:
            total = total + b
        return total


def decompose(u: SpectralField, part: DyadicPartition = None, rule: float = DEFAULT_DEALIAS) -> BlockDecomposition:
    """Blocks of the dealiased field, ``j = -1 .. j_max``."""
    part = _partition(u, part)
    ud = dealias(u, rule)
    return BlockDecomposition([block(ud, j, part) for j in part.indices])


def lowpass_Sn(u: SpectralField, n: int, part: DyadicPartition = None) -> SpectralField:
    """Low-frequency cutoff ``S_n = sum_{j<n} Delta_j``, i.e. the multiplier ``chi(2^-n xi)``."""
    if n < 0:
        raise ConfigurationError(f"cutoff index must be >= 0, got {n}")
    _partition(u, part)
    return u.apply_multiplier(chi(u.grid.xi * 2.0**-n))


def highpass(u: SpectralField, n: int, part: DyadicPartition = None) -> SpectralField:
    """``(Id - S_n) u``."""
    return u - lowpass_Sn(u, n, part)


def block_l2_norms(u: SpectralField, part: DyadicPartition = None) -> np.ndarray:
    """``||Delta_j u||_{L^2}`` for ``j = -1 .. j_max`` (Plancherel on the grid)."""
    part = _partition(u, part)
    power = np.abs(u.coeffs) ** 2 / (2.0 * u.grid.L)
    return np.sqrt(np.maximum(part.weights**2 @ power, 0.0))


@dataclass(frozen=True)
class BesovParams:
    """Indices of the nonhomogeneous Besov norm ``B^s_{2,r}``.

    ``r = inf`` is accepted (sup over blocks) although the convergence theory
    only covers finite ``r``.
    """

    s: float
    r: float = 2.0
    p: int = 2

    def __post_init__(self):
        if self.p != 2:
            raise ConfigurationError("only p = 2 Besov norms are supported")
        if not self.r >= 1:
            raise ConfigurationError(f"Besov summation index r must be >= 1, got {self.r}")

    def shifted(self, ds: float) -> "BesovParams":
        return BesovParams(self.s + ds, self.r, self.p)


def ell_r(values, r: float) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0.0
    if math.isinf(r):
        return float(values.max())
    top = values.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((values / top) ** r) ** (1.0 / r))


def besov_norm(u: SpectralField, params: BesovParams, part: DyadicPartition = None) -> float:
    """``(sum_j 2^{j s r} ||Delta_j u||_{L^2}^r)^{1/r}``, or the sup over j when ``r = inf``."""
    part = _partition(u, part)
    norms = block_l2_norms(u, part)
    j = np.arange(-1, part.j_max + 1)
    return ell_r(2.0 ** (j * params.s) * norms, params.r)


def sobolev_norm(u: SpectralField, sigma: float) -> float:
    """``H^sigma`` norm with weight ``(1 + xi^2)^sigma``."""
    w = (1.0 + u.grid.xi**2) ** sigma
    return float(np.sqrt(np.sum(w * np.abs(u.coeffs) ** 2) / (2.0 * u.grid.L)))


def commutator_block(j: int, f: SpectralField, g: SpectralField, part: DyadicPartition = None,
                     rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """``[Delta_j, f] d_x g = Delta_j(f d_x g) - f Delta_j(d_x g)`` with dealiased products."""
    part = _partition(f, part)
    gx = derivative(g, 1)
    return block(product(f, gx, rule), j, part) - product(f, block(gx, j, part), rule)
