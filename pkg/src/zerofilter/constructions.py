"""Explicit initial data: the band-limited profile, the high/low frequency pair
``f_n, g_n`` and their sum used as counterexample data, and random test fields.

The profile is defined through its transform ``phi_hat``, which is exactly 1
on ``|xi| <= 1/4`` and exactly 0 on ``|xi| >= 1/2``.  Sampling ``phi_hat`` on
the grid frequencies gives the periodization of ``phi`` on ``[-L, L)``, so
every spectral support statement holds exactly on the grid.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .littlewood_paley import BesovParams, DyadicPartition, besov_norm, build_partition, smooth_step
from .spectral import (DEFAULT_DEALIAS, Grid, SpectralField, derivative, product,
                       resolvent_symbol)

MODULATION = 17.0 / 12.0


@dataclass(frozen=True)
class ProfileSpec:
    plateau: float = 0.25
    support: float = 0.5
    transition: str = "exp"

    def __post_init__(self):
        if not 0 < self.plateau < self.support:
            raise ConfigurationError("profile needs 0 < plateau < support")
        if self.transition not in _TRANSITIONS:
            raise ConfigurationError(f"unknown transition {self.transition!r}; known: {sorted(_TRANSITIONS)}")

    def hat(self, xi):
        """``phi_hat`` evaluated at ``xi``."""
        t = (np.abs(np.asarray(xi, dtype=float)) - self.plateau) / (self.support - self.plateau)
        return 1.0 - _TRANSITIONS[self.transition](t)


_TRANSITIONS = {
    "exp": smooth_step,
}

DEFAULT_PROFILE = ProfileSpec()


def _transition_samples(grid: Grid, spec: ProfileSpec) -> int:
    xi = grid.xi
    return int(np.count_nonzero((xi >= spec.plateau) & (xi <= spec.support)))


def make_profile(grid: Grid, spec: ProfileSpec = DEFAULT_PROFILE) -> SpectralField:
    """The profile ``phi`` as the inverse transform of the sampled ``phi_hat``."""
    if _transition_samples(grid, spec) < 8:
        raise ConfigurationError(
            f"grid with L={grid.L:g} resolves the profile transition with fewer than 8 "
            f"frequency samples; increase L")
    return SpectralField.from_coeffs(grid, spec.hat(grid.xi), check=False)


def modulation_frequency(n: int) -> float:
    return MODULATION * 2.0**n


def max_admissible_n(grid: Grid, spec: ProfileSpec = DEFAULT_PROFILE, rule: float = DEFAULT_DEALIAS) -> int:
    """Largest ``n`` whose ``f_n`` spectrum fits below the dealiasing cutoff."""
    cutoff = grid.cutoff_frequency(rule)
    n = 0
    while modulation_frequency(n + 1) + spec.support < cutoff:
        n += 1
    return n


def grid_size_for(n: int, L: float, spec: ProfileSpec = DEFAULT_PROFILE, rule: float = DEFAULT_DEALIAS,
                  minimum: int = 16) -> int:
    """Smallest power-of-two grid size that admits ``f_n`` on ``[-L, L)``."""
    N = max(16, minimum)
    while max_admissible_n(Grid(L, N), spec, rule) < n:
        N *= 2
    return N


def make_fn(grid: Grid, n: int, s: float, spec: ProfileSpec = DEFAULT_PROFILE,
            rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """High-frequency datum ``2^{-ns} phi(x) sin(17/12 2^n x)``.

    Built from the modulated transform
    ``2^{-ns} (phi_hat(xi - w) - phi_hat(xi + w)) / (2i)`` with ``w = 17/12 2^n``.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    omega = modulation_frequency(n)
    if omega + spec.support >= grid.cutoff_frequency(rule):
        raise ConfigurationError(
            f"f_{n} needs frequencies up to {omega + spec.support:.4g} but the grid "
            f"(L={grid.L:g}, N={grid.N}) keeps only {grid.cutoff_frequency(rule):.4g}; "
            f"max admissible n is {max_admissible_n(grid, spec, rule)}")
    make_profile(grid, spec)
    xi = grid.xi
    coeffs = 2.0 ** (-n * s) * (spec.hat(xi - omega) - spec.hat(xi + omega)) / 2j
    return SpectralField.from_coeffs(grid, coeffs, check=False)


def make_gn(grid: Grid, n: int, spec: ProfileSpec = DEFAULT_PROFILE) -> SpectralField:
    """Low-frequency datum ``2^{-n} phi(x)``."""
    return make_profile(grid, spec) * 2.0**-n


@dataclass(frozen=True, eq=False)
class CounterexampleDatum:
    n: int
    s: float
    f: SpectralField
    g: SpectralField
    u0: SpectralField
    alpha: float
    metadata: dict = field(default_factory=dict)


def make_counterexample(grid: Grid, n: int, s: float, spec: ProfileSpec = DEFAULT_PROFILE,
                        r: float = 2.0, rule: float = DEFAULT_DEALIAS) -> CounterexampleDatum:
    """``u0 = f_n + g_n`` with filter parameter ``alpha_n = 2^-n``.

    The metadata records ``||u0||_{B^{s+k}_{2,r}}`` for ``k = -1, 0, 1, 2``.
    """
    f = make_fn(grid, n, s, spec, rule)
    g = make_gn(grid, n, spec)
    u0 = f + g
    part = build_partition(grid)
    norms = {k: besov_norm(u0, BesovParams(s + k, r), part) for k in (-1, 0, 1, 2)}
    meta = {"omega": modulation_frequency(n), "besov_norms": norms, "r": r}
    return CounterexampleDatum(n, s, f, g, u0, 2.0**-n, meta)


@dataclass(frozen=True)
class SupportReport:
    n: int
    annulus: tuple
    outside_mass: float
    besov_gfx: float
    filtered_ratio: float


def support_check_gfx(datum: CounterexampleDatum, part: DyadicPartition = None, r: float = 2.0,
                      rule: float = DEFAULT_DEALIAS) -> SupportReport:
    """Spectral localization and size of the interaction term ``g_n d_x f_n``.

    ``outside_mass`` is the fraction of spectral energy outside
    ``w - 1 <= |xi| <= w + 1``; ``filtered_ratio`` compares the Besov norm of
    ``alpha_n^2 d_x^2 (1 - alpha_n^2 d_x^2)^{-1}(g_n d_x f_n)`` with that of
    ``g_n d_x f_n``.
    """
    grid = datum.u0.grid
    part = part or build_partition(grid)
    gfx = product(datum.g, derivative(datum.f, 1), rule)
    omega = datum.metadata.get("omega", modulation_frequency(datum.n))
    lo, hi = omega - 1.0, omega + 1.0
    power = np.abs(gfx.coeffs) ** 2
    xi = np.abs(grid.xi)
    outside = power[(xi < lo) | (xi > hi)].sum()
    total = power.sum()
    params = BesovParams(datum.s, r)
    a = datum.alpha
    filtered = gfx.apply_multiplier((a * grid.xi) ** 2 * resolvent_symbol(grid.xi, a))
    b_gfx = besov_norm(gfx, params, part)
    ratio = besov_norm(filtered, params, part) / b_gfx if b_gfx > 0 else 0.0
    return SupportReport(datum.n, (lo, hi), float(outside / total) if total > 0 else 0.0, b_gfx, ratio)


def random_band_limited(grid: Grid, max_freq: float, seed: int, amplitude: float = 1.0) -> SpectralField:
    """Reproducible random real field with spectrum in ``|xi| <= max_freq``.

    Coefficients are independent complex Gaussians; the field is scaled so
    that ``max |u| = amplitude``.
    """
    if max_freq <= 0:
        raise ConfigurationError("max_freq must be positive")
    if max_freq > grid.max_frequency:
        raise ConfigurationError(f"max_freq {max_freq} exceeds the grid band {grid.max_frequency:.4g}")
    rng = np.random.default_rng(seed)
    kmax = int(np.floor(max_freq / grid.dxi + 1e-12))
    half = rng.standard_normal(kmax + 1) + 1j * rng.standard_normal(kmax + 1)
    half[0] = half[0].real
    coeffs = np.zeros(grid.N, dtype=complex)
    coeffs[: kmax + 1] = half
    coeffs[grid.N - kmax:] = np.conj(half[1:][::-1])
    u = SpectralField.from_coeffs(grid, coeffs, check=False)
    return u * (amplitude / u.max_abs())
