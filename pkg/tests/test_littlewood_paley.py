import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zerofilter.constructions import make_fn, make_gn, random_band_limited
from zerofilter.errors import ConfigurationError
from zerofilter.littlewood_paley import (BesovParams, besov_norm, block, block_l2_norms, build_partition,
                                         chi, commutator_block, decompose, ell_r, highpass, lowpass_Sn,
                                         phi, sobolev_norm)
from zerofilter.spectral import Grid, SpectralField, dealias, dealias_mask, derivative

DEFAULT = Grid(32 * math.pi, 16384)


def chi_scalar(xi):
    """Independent scalar evaluation of the low-frequency cutoff."""
    t = (abs(xi) - 0.75) / (4 / 3 - 0.75)
    if t <= 0:
        return 1.0
    if t >= 1:
        return 0.0
    a, b = math.exp(-1 / t), math.exp(-1 / (1 - t))
    return 1.0 - a / (a + b)


class TestPartition:
    def test_identity_on_dealiased_frequencies(self):
        part = build_partition(DEFAULT)
        keep = dealias_mask(DEFAULT)
        total = part.weights.sum(axis=0)[keep]
        squares = (part.weights**2).sum(axis=0)[keep]
        assert np.max(np.abs(total - 1)) <= 1e-10
        assert squares.min() >= 0.5 - 1e-10
        assert squares.max() <= 1 + 1e-10

    def test_at_zero(self):
        assert chi(0.0) == 1.0
        assert all(phi(0.0 * 2.0**-j) == 0.0 for j in range(10))

    def test_at_two(self):
        assert chi(2.0) == 0.0
        assert phi(2.0) == pytest.approx(chi_scalar(1.0), abs=1e-15)
        assert chi(2.0) + phi(2.0) + phi(1.0) == pytest.approx(1.0, abs=1e-15)
        # the frozen oracle value of chi(1)
        assert chi_scalar(1.0) == pytest.approx(0.6418340451, abs=1e-9)

    def test_largest_grid_frequency(self):
        part = build_partition(DEFAULT)
        top = int(np.argmax(DEFAULT.xi))
        assert part.weights[:, top].sum() == pytest.approx(1.0, abs=1e-10)

    def test_jmax(self):
        assert build_partition(Grid(32 * math.pi, 65536)).j_max == 10

    def test_matches_scalar_oracle(self):
        xs = np.linspace(0, 5, 501)
        assert np.max(np.abs(chi(xs) - np.array([chi_scalar(x) for x in xs]))) <= 1e-15

    def test_too_coarse(self):
        with pytest.raises(ConfigurationError):
            build_partition(Grid(1.0, 16))


class TestBlocks:
    def test_minus_two_is_zero(self, small_grid):
        u = random_band_limited(small_grid, 40.0, 0)
        assert block(u, -2).max_abs() == 0.0

    def test_single_mode_support(self):
        g = Grid(32 * math.pi, 2048)
        u = SpectralField.from_function(g, lambda x: np.cos(8.0 * x))
        norms = block_l2_norms(u)
        nonzero = {j for j, v in zip(range(-1, len(norms) - 1), norms) if v > 1e-12 * norms.max()}
        assert nonzero == {2, 3}

    def test_reconstruction(self):
        for seed in range(5):
            u = random_band_limited(DEFAULT, 200.0, seed)
            rec = decompose(u).reconstruct()
            ref = dealias(u)
            assert np.max(np.abs(rec.values - ref.values)) <= 1e-10 * ref.max_abs()


class TestCutoffs:
    def test_beyond_band_identity(self, small_grid):
        u = random_band_limited(small_grid, 100.0, 4)
        n = int(math.log2(small_grid.max_frequency)) + 3
        assert np.max(np.abs(lowpass_Sn(u, n).values - u.values)) <= 1e-12

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_fn_removed(self, n):
        f = make_fn(DEFAULT, n, 2.0)
        assert lowpass_Sn(f, n - 2).l2_norm() <= 1e-10 * f.l2_norm()

    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_gn_kept(self, m):
        g = make_gn(DEFAULT, 4)
        assert highpass(g, m).l2_norm() <= 1e-14 * g.l2_norm()

    def test_negative_index(self, small_grid):
        with pytest.raises(ConfigurationError):
            lowpass_Sn(SpectralField.zeros(small_grid), -1)


class TestNorms:
    def test_zero(self, small_grid):
        z = SpectralField.zeros(small_grid)
        assert besov_norm(z, BesovParams(2.0)) == 0.0
        assert sobolev_norm(z, 2.0) == 0.0

    @pytest.mark.parametrize("r", [1.0, 2.0, 3.5, math.inf])
    def test_pure_block(self, r):
        g = Grid(32 * math.pi, 2048)
        j0 = 3
        # phi(2^-j0 xi) = 1 exactly for 2^j0 4/3 <= |xi| <= 2^j0 3/2
        u = SpectralField.from_function(g, lambda x: np.cos(11.0 * x))
        u = u / u.l2_norm()
        assert besov_norm(u, BesovParams(1.5, r)) == pytest.approx(2.0 ** (j0 * 1.5), rel=1e-12)

    def test_sobolev_zero_is_l2(self, small_grid):
        u = random_band_limited(small_grid, 50.0, 9)
        assert sobolev_norm(u, 0.0) == pytest.approx(u.l2_norm(), rel=1e-10)

    @staticmethod
    def _equivalence_ratios():
        g = Grid(32 * math.pi, 4096)
        ratios = []
        for seed in range(100):
            u = random_band_limited(g, 0.5 + 40.0 * (seed % 10) / 9, seed)
            ratios.append(sobolev_norm(u, 2.0) / besov_norm(u, BesovParams(2.0, 2.0)))
        return ratios

    @pytest.mark.xfail(strict=True, reason="low-band fields reach 4.4: the j = -1 block carries weight 2^-s")
    def test_sobolev_besov_equivalence(self):
        ratios = self._equivalence_ratios()
        assert 1 / 3 <= min(ratios) and max(ratios) <= 3

    def test_sobolev_besov_equivalence_frozen(self):
        ratios = self._equivalence_ratios()
        assert 1 / 3 <= min(ratios) and max(ratios) <= 5

    def test_low_block_ratio(self):
        # a field inside the chi plateau: H^s norm = L2 norm, Besov norm = 2^-s L2 norm
        g = Grid(32 * math.pi, 1024)
        u = SpectralField.from_function(g, lambda x: np.cos(x / 32))
        assert sobolev_norm(u, 2.0) / besov_norm(u, BesovParams(2.0)) == pytest.approx(4.0 * (1 + 32.0**-2))

    def test_bad_params(self):
        with pytest.raises(ConfigurationError):
            BesovParams(2.0, 0.0)
        with pytest.raises(ConfigurationError):
            BesovParams(2.0, 2.0, p=3)

    def test_ell_r(self):
        assert ell_r([3.0, 4.0], 2) == pytest.approx(5.0)
        assert ell_r([3.0, 4.0], math.inf) == 4.0
        assert ell_r([], 2) == 0.0

    @settings(max_examples=25, deadline=None)
    @given(s1=st.floats(-1, 3), ds=st.floats(0, 2), seed=st.integers(0, 1000))
    def test_monotone_in_s_without_low_block(self, s1, ds, seed):
        u = highpass(random_band_limited(Grid(32 * math.pi, 1024), 10.0, seed), 0)
        assert besov_norm(u, BesovParams(s1)) <= besov_norm(u, BesovParams(s1 + ds)) * (1 + 1e-12)

    @settings(max_examples=25, deadline=None)
    @given(r=st.floats(1, 6), s=st.floats(0, 3), seed=st.integers(0, 1000))
    def test_triangle(self, r, s, seed):
        g = Grid(32 * math.pi, 1024)
        u, v = random_band_limited(g, 10.0, seed), random_band_limited(g, 5.0, seed + 1)
        p = BesovParams(s, r)
        assert besov_norm(u + v, p) <= (besov_norm(u, p) + besov_norm(v, p)) * (1 + 1e-12)


class TestCommutator:
    def test_constant_f(self, small_grid):
        f = SpectralField.from_values(small_grid, np.full(small_grid.N, 2.0))
        g = random_band_limited(small_grid, 20.0, 1)
        for j in range(-1, 4):
            assert commutator_block(j, f, g).max_abs() <= 1e-12

    def test_constant_g(self, small_grid):
        f = random_band_limited(small_grid, 20.0, 1)
        g = SpectralField.from_values(small_grid, np.full(small_grid.N, 2.0))
        assert commutator_block(1, f, g).max_abs() <= 1e-12

    def test_bounded(self):
        g = Grid(32 * math.pi, 4096)
        part = build_partition(g)
        s = 2.0
        p = BesovParams(s)
        for seed in range(3):
            f, h = random_band_limited(g, 6.0, seed), random_band_limited(g, 6.0, seed + 50)
            norms = [2.0 ** (j * s) * commutator_block(j, f, h, part).l2_norm() for j in part.indices]
            lhs = ell_r(norms, 2.0)
            rhs = (derivative(f, 1).max_abs() * besov_norm(h, p, part)
                   + besov_norm(f, p, part) * derivative(h, 1).max_abs())
            assert np.isfinite(lhs) and lhs <= 100 * rhs
