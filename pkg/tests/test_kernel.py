import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sugar import (
    BandwidthSpec,
    adaptive_bandwidths,
    degrees,
    gaussian_kernel,
    maxmin_bandwidth,
    pairwise_sq_dist,
    row_normalize,
)


def random_points(n, d, seed):
    return np.random.default_rng(seed).standard_normal((n, d))


class TestPairwiseSqDist:
    def test_hand_example_1d(self):
        d2 = pairwise_sq_dist(np.array([[0.0], [3.0]]), np.array([[0.0], [3.0]]))
        assert np.allclose(d2, [[0.0, 9.0], [9.0, 0.0]])

    def test_identical_rows_give_zero(self):
        pts = np.tile([1.5, -2.0], (4, 1))
        assert pairwise_sq_dist(pts, pts).max() == 0.0

    def test_matches_double_loop(self):
        a = random_points(50, 3, 0)
        b = random_points(40, 3, 1)
        d2 = pairwise_sq_dist(a, b)
        brute = np.empty((50, 40))
        for i in range(50):
            for j in range(40):
                brute[i, j] = np.sum((a[i] - b[j]) ** 2)
        assert np.abs(d2 - brute).max() < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            pairwise_sq_dist(np.ones((2, 2)), np.ones((2, 3)))


class TestMaxminBandwidth:
    def test_exhaustive_example(self):
        # min sq dists of {0,1,3} are (1,1,4); C=2 doubles the max
        assert maxmin_bandwidth(np.array([[0.0], [1.0], [3.0]]), 2.0) == pytest.approx(8.0)

    def test_duplicates_do_not_zero_the_max(self):
        pts = np.array([[0.0], [0.0], [2.0]])
        assert maxmin_bandwidth(pts, 2.0) == pytest.approx(8.0)

    def test_scaling_homogeneity(self):
        pts = random_points(20, 2, 3)
        base = maxmin_bandwidth(pts, 2.5)
        assert maxmin_bandwidth(3.0 * pts, 2.5) == pytest.approx(9.0 * base)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            maxmin_bandwidth(np.ones((1, 2)), 2.0)


class TestAdaptiveBandwidths:
    def test_hand_enumeration(self):
        scales = adaptive_bandwidths(np.array([[0.0], [1.0], [3.0]]), r=1)
        assert np.allclose(scales, [1.0, 1.0, 2.0])

    def test_duplicate_point_is_degenerate(self):
        pts = np.array([[1.0, 1.0], [1.0, 1.0], [3.0, 0.0]])
        with pytest.raises(ValueError, match="degenerate"):
            adaptive_bandwidths(pts, r=1)

    def test_positive_on_generic_data(self):
        assert adaptive_bandwidths(random_points(30, 4, 5), r=3).min() > 0

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            adaptive_bandwidths(random_points(5, 2, 0), r=5)


class TestGaussianKernel:
    def test_unit_diagonal_fixed(self):
        pts = random_points(8, 2, 1)
        k = gaussian_kernel(pts, pts, BandwidthSpec.fixed(0.7))
        assert np.allclose(np.diag(k.values), 1.0)

    def test_two_sigma_sq_distance_gives_inv_e(self):
        pts = np.array([[0.0], [math.sqrt(2.0)]])  # squared distance 2, sigma2 = 1
        k = gaussian_kernel(pts, pts, BandwidthSpec.fixed(1.0))
        assert k.values[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_square_symmetry(self):
        pts = random_points(100, 3, 7)
        k = gaussian_kernel(pts, pts, BandwidthSpec.maxmin(2.0))
        assert np.abs(k.values - k.values.T).max() < 1e-12

    def test_entries_in_unit_interval(self):
        pts = random_points(40, 2, 9)
        k = gaussian_kernel(pts, pts, BandwidthSpec.adaptive(3))
        assert k.values.min() > 0.0 and k.values.max() <= 1.0

    def test_maxmin_guarantees_strong_neighbor(self):
        pts = random_points(60, 2, 11)
        k = gaussian_kernel(pts, pts, BandwidthSpec.maxmin(2.0))
        off = k.values - np.eye(60)
        assert off.max(axis=1).min() >= math.exp(-1.0 / 4.0) - 1e-12

    def test_zero_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            BandwidthSpec.fixed(0.0)

    def test_adaptive_uses_scale_product(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        k = gaussian_kernel(pts, pts, BandwidthSpec.adaptive(1))
        # scales (1,1,2); entry(0,2): exp(-9 / (2*1*2))
        assert k.values[0, 2] == pytest.approx(math.exp(-9.0 / 4.0), abs=1e-12)

    def test_translation_invariance(self):
        pts = random_points(30, 3, 13)
        shifted = pts + np.array([100.0, -40.0, 7.0])
        k0 = gaussian_kernel(pts, pts, BandwidthSpec.maxmin(2.0))
        k1 = gaussian_kernel(shifted, shifted, BandwidthSpec.maxmin(2.0))
        assert np.abs(k0.values - k1.values).max() < 1e-10
        d0, d1 = degrees(k0), degrees(k1)
        assert np.abs(d0.degrees - d1.degrees).max() < 1e-10
        p0, p1 = row_normalize(k0), row_normalize(k1)
        assert np.abs(p0.values - p1.values).max() < 1e-10


class TestDegrees:
    def test_identical_pair(self):
        pts = np.array([[2.0, 2.0], [2.0, 2.0]])
        prof = degrees(gaussian_kernel(pts, pts, BandwidthSpec.fixed(1.0)))
        assert np.allclose(prof.degrees, [2.0, 2.0])
        assert np.allclose(prof.sparsities, [0.5, 0.5])

    def test_single_point(self):
        prof = degrees(gaussian_kernel(np.ones((1, 2)), np.ones((1, 2)), BandwidthSpec.fixed(1.0)))
        assert np.allclose(prof.degrees, [1.0])

    def test_matches_row_sum_loop(self):
        pts = random_points(25, 2, 17)
        k = gaussian_kernel(pts, pts, BandwidthSpec.fixed(0.5))
        prof = degrees(k)
        loop = np.array([sum(k.values[i, j] for j in range(25)) for i in range(25)])
        assert np.abs(prof.degrees - loop).max() < 1e-12

    def test_sparsity_reciprocal_invariant(self):
        pts = random_points(12, 2, 19)
        prof = degrees(gaussian_kernel(pts, pts, BandwidthSpec.fixed(2.0)))
        assert np.abs(prof.degrees * prof.sparsities - 1.0).max() < 1e-12

    def test_fixed_square_degree_at_least_one(self):
        pts = random_points(15, 3, 23) * 100.0
        prof = degrees(gaussian_kernel(pts, pts, BandwidthSpec.fixed(0.01)))
        assert prof.degrees.min() >= 1.0


class TestRowNormalize:
    def test_all_ones_kernel(self):
        pts = np.array([[1.0, 1.0], [1.0, 1.0]])
        op = row_normalize(gaussian_kernel(pts, pts, BandwidthSpec.fixed(1.0)))
        assert np.allclose(op.values, 0.5)
        assert op.time == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_rows_sum_to_one(self, seed):
        pts = random_points(12, 2, seed)
        op = row_normalize(gaussian_kernel(pts, pts, BandwidthSpec.maxmin(2.0)))
        assert np.abs(op.values.sum(axis=1) - 1.0).max() < 1e-10

    def test_near_identity_kernel(self):
        pts = np.array([[0.0], [1e6], [2e6]])
        op = row_normalize(gaussian_kernel(pts, pts, BandwidthSpec.fixed(1.0)))
        assert np.allclose(op.values, np.eye(3))


class TestBandwidthSpec:
    def test_parse_round_trip(self):
        for text in ("fixed:0.5", "maxmin:2.5", "adaptive:7"):
            spec = BandwidthSpec.parse(text)
            assert BandwidthSpec.parse(spec.describe()) == spec

    def test_maxmin_constant_range(self):
        with pytest.raises(ValueError):
            BandwidthSpec.maxmin(1.5)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            BandwidthSpec.parse("banana:1")
