"""Distribution of squared distances under a matrix-normal model.

For rows of Y ~ MN(0, K, I_d), the squared distance d_ij^2 = |Y_i - Y_j|^2
is Gamma(shape d/2, scale 2*k_tilde) with k_tilde = k_ii + k_jj - 2 k_ij,
so E = d*k_tilde and V = 2d*k_tilde^2, and the covariance between two
squared distances is 2d*(k_im + k_jn - k_in - k_jm)^2 (Gaussian moment
factorization).  Distances are mean-invariant, so sampling uses mean 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogi
from scipy.stats import gamma as gamma_dist


@dataclass(frozen=True)
class DistanceMoments:
    mean: float
    variance: float
    k_tilde: float
    gamma_shape: float
    gamma_scale: float


def distance_moments(K: np.ndarray, i: int, j: int, d: int) -> DistanceMoments:
    """Analytic moments of d_ij^2 for a PSD kernel K and ambient dimension d."""
    K = np.asarray(K, dtype=np.float64)
    if i == j:
        raise ValueError("need two distinct indices")
    if d < 1:
        raise ValueError("ambient dimension d must be >= 1")
    # same evaluation order as distance_covariance at (m, n) = (i, j), so the
    # self-covariance equals the variance bit for bit
    k_tilde = float(K[i, i] + K[j, j] - K[i, j] - K[j, i])
    if k_tilde < -1e-12 * max(1.0, np.abs(K).max()):
        raise ValueError(f"k_ii + k_jj - 2k_ij = {k_tilde} < 0; K is not PSD")
    k_tilde = max(k_tilde, 0.0)
    return DistanceMoments(
        mean=d * k_tilde,
        variance=2.0 * d * k_tilde**2,
        k_tilde=k_tilde,
        gamma_shape=d / 2.0,
        gamma_scale=2.0 * k_tilde,
    )


def distance_covariance(K: np.ndarray, pair_ij, pair_mn, d: int) -> float:
    """Analytic Cov(d_ij^2, d_mn^2) = 2d * (k_im + k_jn - k_in - k_jm)^2."""
    K = np.asarray(K, dtype=np.float64)
    i, j = pair_ij
    m, n = pair_mn
    return 2.0 * d * float(K[i, m] + K[j, n] - K[i, n] - K[j, m]) ** 2


def sample_sq_distances(K: np.ndarray, d: int, n_samples: int, seed: int):
    """Monte Carlo squared distances: (pairs, samples array of shape (n_samples, n_pairs)).

    Y is drawn as MN(0, K, I_d) through a symmetric PSD square root of K
    (eigenvalues clamped at 0, so semidefinite K is fine).
    """
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    w, V = np.linalg.eigh(K)
    F = V * np.sqrt(np.clip(w, 0.0, None))
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n_samples, n, d))
    Y = np.einsum("ij,sjd->sid", F, Z)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = np.empty((n_samples, len(pairs)))
    for p, (i, j) in enumerate(pairs):
        diff = Y[:, i, :] - Y[:, j, :]
        out[:, p] = np.einsum("sd,sd->s", diff, diff)
    return pairs, out


@dataclass(frozen=True)
class MCDistanceReport:
    n_samples: int
    max_z_mean: float
    max_z_variance: float
    max_z_covariance: float
    ks_statistic: float
    ks_threshold: float
    z_tolerance: float

    @property
    def max_z(self) -> float:
        return max(self.max_z_mean, self.max_z_variance, self.max_z_covariance)

    @property
    def passed(self) -> bool:
        return self.max_z <= self.z_tolerance and self.ks_statistic <= self.ks_threshold

    def as_table(self) -> str:
        rows = [
            ("statistic", "worst |z| or value", "limit"),
            ("mean of d^2", f"{self.max_z_mean:.3f}", f"{self.z_tolerance:g}"),
            ("variance of d^2", f"{self.max_z_variance:.3f}", f"{self.z_tolerance:g}"),
            ("covariance of d^2 pairs", f"{self.max_z_covariance:.3f}", f"{self.z_tolerance:g}"),
            ("KS statistic (Gamma marginal)", f"{self.ks_statistic:.5f}", f"{self.ks_threshold:.5f}"),
        ]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        return "\n".join(f"{a:<{w0}}  {b:>{w1}}  {c}" for a, b, c in rows)


def _ks_statistic(samples: np.ndarray, shape: float, scale: float) -> float:
    xs = np.sort(samples)
    cdf = gamma_dist.cdf(xs, a=shape, scale=scale)
    n = len(xs)
    up = np.arange(1, n + 1) / n - cdf
    lo = cdf - np.arange(0, n) / n
    return float(max(up.max(), lo.max()))


def mc_verify_distances(
    K: np.ndarray,
    d: int,
    n_samples: int,
    seed: int,
    z_tolerance: float = 5.0,
    ks_alpha: float = 1e-3,
) -> MCDistanceReport:
    """Compare Monte Carlo moments of all squared distances with the analytic formulas.

    Means and variances are standardised with their theoretical sampling
    errors (Gamma fourth moments); covariance estimates use batch-resampled
    standard errors.  The Gamma marginal of the first pair is checked with
    a KS test against the asymptotic threshold at level ``ks_alpha``.
    """
    if n_samples < 1000:
        raise ValueError("need n_samples >= 1000")
    K = np.asarray(K, dtype=np.float64)
    pairs, D2 = sample_sq_distances(K, d, n_samples, seed)
    npairs = len(pairs)

    means = np.array([distance_moments(K, i, j, d).mean for i, j in pairs])
    variances = np.array([distance_moments(K, i, j, d).variance for i, j in pairs])
    shape = d / 2.0

    emp_mean = D2.mean(axis=0)
    se_mean = np.sqrt(variances / n_samples)
    z_mean = np.abs(emp_mean - means) / np.maximum(se_mean, 1e-300)

    emp_var = D2.var(axis=0, ddof=1)
    # Var(s^2) for a Gamma: ((2 + 6/shape) * sigma^4) / N to leading order
    se_var = np.sqrt((2.0 + 6.0 / shape) * variances**2 / n_samples)
    z_var = np.abs(emp_var - variances) / np.maximum(se_var, 1e-300)

    centered = D2 - emp_mean
    emp_cov = centered.T @ centered / (n_samples - 1)
    ana_cov = np.empty((npairs, npairs))
    for a in range(npairs):
        for b in range(npairs):
            ana_cov[a, b] = distance_covariance(K, pairs[a], pairs[b], d)
    n_batches = 100
    batch = n_samples // n_batches
    bc = np.empty((n_batches, npairs, npairs))
    for b in range(n_batches):
        blk = D2[b * batch : (b + 1) * batch]
        cb = blk - blk.mean(axis=0)
        bc[b] = cb.T @ cb / (batch - 1)
    se_cov = bc.std(axis=0, ddof=1) / np.sqrt(n_batches)
    iu = np.triu_indices(npairs)  # includes the diagonal (variances re-checked as covariances)
    z_cov = np.abs(emp_cov - ana_cov)[iu] / np.maximum(se_cov[iu], 1e-300)

    i0, j0 = pairs[0]
    mom = distance_moments(K, i0, j0, d)
    if mom.k_tilde > 0:
        ks = _ks_statistic(D2[:, 0], shape, mom.gamma_scale)
    else:
        ks = 0.0
    threshold = float(kolmogi(ks_alpha)) / np.sqrt(n_samples)

    return MCDistanceReport(
        n_samples=n_samples,
        max_z_mean=float(z_mean.max()),
        max_z_variance=float(z_var.max()),
        max_z_covariance=float(z_cov.max()),
        ks_statistic=ks,
        ks_threshold=threshold,
        z_tolerance=z_tolerance,
    )
