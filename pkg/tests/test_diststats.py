import numpy as np
import pytest
from helpers import random_psd
from scipy.stats import gamma as gamma_dist

from wishmap.diststats import (
    distance_covariance,
    distance_moments,
    mc_verify_distances,
    sample_sq_distances,
)


class TestDistanceMoments:
    def test_unit_kernel_values(self):
        m = distance_moments(np.eye(2), 0, 1, d=10)
        assert m.mean == 20.0
        assert m.variance == 80.0
        assert m.k_tilde == 2.0
        assert m.gamma_shape == 5.0
        assert m.gamma_scale == 4.0

    def test_perfectly_correlated_degenerate(self):
        K = np.ones((2, 2))
        m = distance_moments(K, 0, 1, d=7)
        assert m.mean == 0.0
        assert m.variance == 0.0

    def test_gamma_parameterisation(self):
        K = np.array([[2.0, 0.5], [0.5, 2.0]])  # k_tilde = 3
        m = distance_moments(K, 0, 1, d=2)
        assert m.gamma_shape == 1.0
        assert m.gamma_scale == 6.0
        assert m.mean == 6.0

    def test_moment_consistency(self):
        K = random_psd(5, seed=0)
        for i in range(5):
            for j in range(i + 1, 5):
                m = distance_moments(K, i, j, d=13)
                np.testing.assert_allclose(m.mean, m.gamma_shape * m.gamma_scale, rtol=1e-12)
                np.testing.assert_allclose(m.variance, m.gamma_shape * m.gamma_scale**2, rtol=1e-12)

    def test_rejects_same_index(self):
        with pytest.raises(ValueError):
            distance_moments(np.eye(3), 1, 1, d=2)

    def test_rejects_invalid_kernel(self):
        K = np.array([[1.0, 2.0], [2.0, 1.0]])  # k_tilde = -2, not PSD
        with pytest.raises(ValueError, match="not PSD"):
            distance_moments(K, 0, 1, d=2)


class TestDistanceCovariance:
    def test_self_pair_equals_variance(self):
        K = random_psd(6, seed=1)
        for i in range(6):
            for j in range(i + 1, 6):
                cov = distance_covariance(K, (i, j), (i, j), d=9)
                assert cov == distance_moments(K, i, j, d=9).variance

    def test_disjoint_pairs_identity_kernel(self):
        assert distance_covariance(np.eye(4), (0, 1), (2, 3), d=10) == 0.0

    def test_shared_index_identity_kernel(self):
        assert distance_covariance(np.eye(4), (0, 1), (0, 2), d=10) == 2.0 * 10


class TestMonteCarlo:
    def test_identity_kernel_means_within_two_percent(self):
        pairs, D2 = sample_sq_distances(np.eye(4), d=10, n_samples=10_000, seed=0)
        emp = D2.mean(axis=0)
        assert np.all(np.abs(emp - 20.0) / 20.0 < 0.02)

    def test_variances_within_ten_percent(self):
        _, D2 = sample_sq_distances(np.eye(4), d=10, n_samples=10_000, seed=1)
        emp = D2.var(axis=0, ddof=1)
        assert np.all(np.abs(emp - 80.0) / 80.0 < 0.10)

    def test_disjoint_covariance_within_three_se(self):
        pairs, D2 = sample_sq_distances(np.eye(4), d=10, n_samples=10_000, seed=2)
        a, b = pairs.index((0, 1)), pairs.index((2, 3))
        x, y = D2[:, a], D2[:, b]
        emp = np.cov(x, y)[0, 1]
        se = np.sqrt(x.var(ddof=1) * y.var(ddof=1) / len(x))
        assert abs(emp) <= 3.0 * se

    def test_report_passes_on_random_kernel(self):
        rep = mc_verify_distances(random_psd(6, seed=3), d=32, n_samples=10_000, seed=4)
        assert rep.passed
        assert rep.max_z <= 5.0
        assert "KS" in rep.as_table()

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            mc_verify_distances(np.eye(3), d=4, n_samples=100, seed=0)

    def test_convergence_rate(self):
        # standardized RMS error over all means+variances should drop like
        # 1/sqrt(N): ratio ~ 4 between N and 16N, required within a factor 3
        K = random_psd(5, seed=5)
        d = 16

        def rms_error(n_samples, seed):
            pairs, D2 = sample_sq_distances(K, d, n_samples, seed)
            errs = []
            for p, (i, j) in enumerate(pairs):
                m = distance_moments(K, i, j, d)
                errs.append((D2[:, p].mean() - m.mean) / np.sqrt(m.variance))
                se_v = np.sqrt((2.0 + 6.0 / m.gamma_shape)) * m.variance
                errs.append((D2[:, p].var(ddof=1) - m.variance) / se_v)
            return np.sqrt(np.mean(np.square(errs)))

        e_small = rms_error(2_000, seed=6)
        e_large = rms_error(32_000, seed=7)
        ratio = e_small / e_large
        assert 4.0 / 3.0 <= ratio <= 12.0

    def test_gamma_marginal_ks(self):
        K = np.eye(3) * 1.5
        pairs, D2 = sample_sq_distances(K, d=8, n_samples=10_000, seed=8)
        m = distance_moments(K, *pairs[0], d=8)
        xs = np.sort(D2[:, 0])
        cdf = gamma_dist.cdf(xs, a=m.gamma_shape, scale=m.gamma_scale)
        n = len(xs)
        stat = max((np.arange(1, n + 1) / n - cdf).max(), (cdf - np.arange(n) / n).max())
        assert stat <= 1.9495 / np.sqrt(n)  # asymptotic threshold at level 1e-3
