"""Kernel and centering algebra: Student-t kernels, elementwise logs, double-centering.

The centering matrix H = I - 11^T/n is never materialised; centering is
applied as the operator M - rowmeans - colmeans + grandmean, which is
exact and O(n^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Embedding


@dataclass(frozen=True)
class KernelMatrix:
    """A symmetric kernel matrix tagged with the construction that produced it."""

    matrix: np.ndarray
    kind: str  # student_t | scaled_student_t | log_kernel | centered
    scale: float = 1.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _as_coords(X) -> np.ndarray:
    if isinstance(X, Embedding):
        return X.coords
    return np.asarray(X, dtype=np.float64)


def sq_distance_matrix(X) -> np.ndarray:
    """Pairwise squared Euclidean distances of the rows of X.

    Uses the Gram expansion; tiny negative values from cancellation are
    clamped to 0 so duplicate rows give exactly 0.
    """
    V = _as_coords(X)
    sq = np.einsum("ij,ij->i", V, V)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (V @ V.T)
    np.maximum(D2, 0.0, out=D2)
    D2 = 0.5 * (D2 + D2.T)
    np.fill_diagonal(D2, 0.0)
    return D2


def student_t_kernel(D2: np.ndarray, s: float = 1.0) -> KernelMatrix:
    """Entrywise 1 / (1 + s * d^2); s=1 is the plain Student-t (Cauchy) kernel."""
    if s <= 0:
        raise ValueError("scale s must be positive")
    D2 = np.asarray(D2, dtype=np.float64)
    kind = "student_t" if s == 1.0 else "scaled_student_t"
    return KernelMatrix(1.0 / (1.0 + s * D2), kind, s)


def log_kernel(P, scale: float) -> KernelMatrix:
    """Entrywise log(scale * P); requires strictly positive entries."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    M = P.matrix if isinstance(P, KernelMatrix) else np.asarray(P, dtype=np.float64)
    if np.any(M <= 0):
        raise ValueError("log_kernel requires strictly positive entries")
    return KernelMatrix(np.log(scale * M), "log_kernel", scale)


def double_center(M: np.ndarray) -> np.ndarray:
    """H M H for symmetric M, computed as M - rowmeans - colmeans + grandmean."""
    M = np.asarray(M, dtype=np.float64)
    rm = M.mean(axis=1, keepdims=True)
    cm = M.mean(axis=0, keepdims=True)
    return M - rm - cm + M.mean()


def centering_matrix(n: int) -> np.ndarray:
    """Explicit H = I - 11^T/n (small-n use only; prefer double_center)."""
    return np.eye(n) - np.full((n, n), 1.0 / n)


def log_ansatz(P, eps_tilde: float):
    """Two-term expansion of log P around P = eps_tilde.

    Returns P/(2*eps_tilde) - eps_tilde/(2P) + log(eps_tilde), which matches
    log P in value and first derivative at P = eps_tilde.  Accepts scalars
    or arrays of strictly positive P.
    """
    if eps_tilde <= 0:
        raise ValueError("eps_tilde must be positive")
    P = np.asarray(P, dtype=np.float64)
    if np.any(P <= 0):
        raise ValueError("P must be strictly positive")
    out = P / (2.0 * eps_tilde) - eps_tilde / (2.0 * P) + np.log(eps_tilde)
    return float(out) if out.ndim == 0 else out


def psd_check(M: np.ndarray, tol: float | None = None) -> tuple[bool, float]:
    """Whether symmetric M is PSD up to -tol; returns (verdict, smallest eigenvalue).

    Default tol is 1e-8 * n * max|M|, since eigenvalue noise grows with
    problem size.
    """
    M = np.asarray(M, dtype=np.float64)
    if tol is None:
        tol = 1e-8 * M.shape[0] * max(np.abs(M).max(), 1.0)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    lam_min = float(np.linalg.eigvalsh(M)[0])
    return lam_min >= -tol, lam_min
