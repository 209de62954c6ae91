import math

import numpy as np
import pytest

from sugar import (
    BandwidthSpec,
    degrees,
    gaussian_kernel,
    generation_bounds,
    local_covariances,
    sample_batch,
)
from sugar.generation import GenerationPlan, LocalCovarianceSet
from sugar.kernel import DegreeProfile


def profile_from(deg):
    deg = np.asarray(deg, dtype=float)
    return DegreeProfile(degrees=deg, sparsities=1.0 / deg, measure=1.0 / deg)


def covset(covs, k=1, jitter=None):
    covs = np.asarray(covs, dtype=float)
    jit = np.zeros(covs.shape[0]) if jitter is None else np.full(covs.shape[0], jitter)
    return LocalCovarianceSet(covs, k=k, jitter=jit)


class TestLocalCovariances:
    def test_hand_example_1d(self):
        cov = local_covariances(np.array([[0.0], [1.0], [3.0]]), k=2, jitter=0.0)
        # at x=1 the neighbors are 0 and 3: (1 + 4) / 2
        assert cov.covariances[1, 0, 0] == pytest.approx(2.5)
        # at x=0 the neighbors are 1 and 3: (1 + 9) / 2
        assert cov.covariances[0, 0, 0] == pytest.approx(5.0)
        # at x=3 the neighbors are 1 and 0: (4 + 9) / 2
        assert cov.covariances[2, 0, 0] == pytest.approx(6.5)

    def test_duplicate_with_k1_gives_zero_matrix(self):
        pts = np.array([[2.0, 2.0], [2.0, 2.0], [9.0, 9.0]])
        cov = local_covariances(pts, k=1, jitter=0.0)
        assert np.all(cov.covariances[0] == 0.0)

    def test_symmetric_psd_on_random_data(self):
        for seed in range(100):
            pts = np.random.default_rng(seed).standard_normal((12, 3))
            cov = local_covariances(pts, k=4)
            asym = np.abs(cov.covariances - np.transpose(cov.covariances, (0, 2, 1))).max()
            assert asym < 1e-12
            assert np.linalg.eigvalsh(cov.covariances).min() > -1e-10

    def test_default_jitter_scales_with_trace(self):
        pts = np.random.default_rng(1).standard_normal((8, 2))
        cov = local_covariances(pts, k=3)
        traces = np.trace(cov.covariances, axis1=1, axis2=2)
        assert np.all(cov.jitter <= 1e-11 * traces)
        assert np.all(cov.jitter > 0)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            local_covariances(np.ones((3, 1)), k=3)


class TestGenerationBounds:
    def test_hand_derived_example(self):
        # 1-D, sigma2 = 0.5, Sigma = 2 sigma2 = 1.0, degrees (2, 5)
        plan = generation_bounds(
            profile_from([2.0, 5.0]), covset([[[1.0]], [[1.0]]]), sigma2=0.5
        )
        root2 = math.sqrt(2.0)
        assert plan.upper[0] == pytest.approx(3.0 * root2, abs=1e-9)
        assert plan.lower[0] == pytest.approx(root2 - 1.0, abs=1e-9)
        assert plan.levels[0] == 2  # round((0.4142 + 4.2426) / 2)

    def test_max_degree_point_generates_nothing(self):
        plan = generation_bounds(
            profile_from([2.0, 5.0]), covset([[[1.0]], [[1.0]]]), sigma2=0.5
        )
        assert plan.upper[1] == pytest.approx(0.0)
        assert plan.lower[1] == pytest.approx(-1.0)
        assert plan.levels[1] == 0

    def test_zero_covariance_unit_determinant(self):
        plan = generation_bounds(
            profile_from([1.0, 4.0]), covset([[[0.0]], [[0.0]]]), sigma2=1.0
        )
        assert plan.upper[0] == pytest.approx(3.0)

    def test_levels_monotone_in_degree_under_equal_covariance(self):
        deg = np.array([1.0, 2.5, 3.0, 4.5, 7.0, 7.0])
        covs = np.tile(np.eye(2), (6, 1, 1))
        plan = generation_bounds(profile_from(deg), covset(covs), sigma2=1.0)
        assert np.all(np.diff(plan.levels) <= 0)

    def test_equal_degrees_generate_nothing(self):
        plan = generation_bounds(
            profile_from([3.0, 3.0, 3.0]), covset(np.tile(np.eye(1), (3, 1, 1))), sigma2=1.0
        )
        assert plan.total == 0

    def test_degree_spread_narrows_on_two_cluster_fixture(self):
        # dense cluster + sparse cluster in 1-D; adding the planned points
        # and re-measuring with the same sigma narrows the relative degree
        # spread (absolute degrees grow with the point count)
        pts = np.concatenate([np.linspace(0.0, 1.0, 12), [4.0, 4.7, 5.6]])[:, None]
        bw = BandwidthSpec.fixed(0.25)
        prof = degrees(gaussian_kernel(pts, pts, bw))
        cov = local_covariances(pts, k=3, jitter=0.0)
        plan = generation_bounds(prof, cov, 0.25)
        batch = sample_batch(pts, cov, plan, seed=11)
        combined = np.vstack([pts, batch.points])
        d0 = prof.degrees
        d1 = degrees(gaussian_kernel(combined, combined, bw)).degrees
        before = np.var(d0 / d0.mean(), ddof=1)
        after = np.var(d1 / d1.mean(), ddof=1)
        assert plan.total > 0
        assert after < before

    def test_non_psd_rejected(self):
        with pytest.raises(ValueError, match="semidefinite"):
            generation_bounds(
                profile_from([1.0, 2.0]),
                covset([[[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]),
                sigma2=1.0,
            )

    def test_plan_invariants(self):
        rng = np.random.default_rng(3)
        deg = rng.uniform(1.0, 9.0, 20)
        covs = np.stack([np.eye(2) * v for v in rng.uniform(0.0, 2.0, 20)])
        plan = generation_bounds(profile_from(deg), covset(covs), sigma2=0.7)
        assert np.all(plan.lower <= plan.upper + 1e-9)
        expected = np.maximum(0, np.floor((plan.lower + plan.upper) / 2.0 + 0.5))
        assert np.array_equal(plan.levels, expected.astype(int))
        assert plan.total == plan.levels.sum()


class TestSampleBatch:
    def test_zero_plan_gives_empty_batch(self):
        pts = np.random.default_rng(0).standard_normal((4, 2))
        cov = local_covariances(pts, k=2)
        plan = GenerationPlan(np.zeros(4, dtype=int), -np.ones(4), np.zeros(4))
        batch = sample_batch(pts, cov, plan, seed=0)
        assert batch.m == 0
        assert batch.points.shape == (0, 2)

    def test_degenerate_gaussian_reproduces_center(self):
        pts = np.array([[1.0, 2.0], [5.0, 5.0]])
        cov = covset(np.zeros((2, 2, 2)), k=1)
        plan = GenerationPlan(np.array([3, 0]), np.zeros(2), np.ones(2))
        batch = sample_batch(pts, cov, plan, seed=42)
        assert np.allclose(batch.points, [1.0, 2.0])
        assert np.array_equal(batch.origin, [0, 0, 0])

    def test_monte_carlo_covariance(self):
        sigma = np.array([[2.0, 0.6], [0.6, 1.0]])
        pts = np.zeros((1, 2))
        plan = GenerationPlan(np.array([20000]), np.zeros(1), np.ones(1))
        batch = sample_batch(pts, covset([sigma]), plan, seed=7)
        sample_cov = np.cov(batch.points.T)
        err = np.linalg.norm(sample_cov - sigma) / np.linalg.norm(sigma)
        assert err < 0.05

    def test_deterministic_and_order_independent(self):
        pts = np.random.default_rng(5).standard_normal((6, 2))
        cov = local_covariances(pts, k=2)
        plan = GenerationPlan(
            np.array([2, 0, 1, 3, 0, 1]), np.zeros(6), np.full(6, 4.0)
        )
        a = sample_batch(pts, cov, plan, seed=9)
        b = sample_batch(pts, cov, plan, seed=9)
        assert np.array_equal(a.points, b.points)
        # dropping a point's own level leaves other points' draws unchanged
        plan2 = GenerationPlan(
            np.array([2, 0, 1, 0, 0, 1]), np.zeros(6), np.full(6, 4.0)
        )
        c = sample_batch(pts, cov, plan2, seed=9)
        assert np.array_equal(c.points[:3], a.points[:3])
        assert np.array_equal(c.points[3:], a.points[6:])

    def test_negative_seed_rejected(self):
        pts = np.ones((2, 1))
        cov = covset(np.ones((2, 1, 1)))
        plan = GenerationPlan(np.array([1, 0]), np.zeros(2), np.ones(2))
        with pytest.raises(ValueError, match="nonnegative"):
            sample_batch(pts, cov, plan, seed=-4)
