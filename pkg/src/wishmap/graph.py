"""Exact k-nearest-neighbour graphs, Laplacians, and the jittered inverse covariance estimate.

kNN search is brute force (O(n^2 d), row-blocked to bound memory) with
ties broken towards the smaller index, then symmetrised by union: an edge
is present if either endpoint selects the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dataio import DataMatrix
from .kernels import double_center


@dataclass(frozen=True)
class NeighborGraph:
    """Symmetric binary adjacency stored as a sorted (i < j) edge list."""

    edges: np.ndarray  # (m, 2) int64, lexicographically sorted, i < j
    degrees: np.ndarray  # (n,) int64
    n: int
    k: int

    def adjacency(self) -> np.ndarray:
        """Dense n x n 0/1 adjacency matrix."""
        A = np.zeros((self.n, self.n))
        if len(self.edges):
            i, j = self.edges[:, 0], self.edges[:, 1]
            A[i, j] = 1.0
            A[j, i] = 1.0
        return A

    def n_components(self) -> int:
        m = len(self.edges)
        data = np.ones(2 * m)
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]]) if m else np.array([], dtype=np.int64)
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]]) if m else np.array([], dtype=np.int64)
        sp = csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        ncomp, _ = connected_components(sp, directed=False)
        return int(ncomp)


@dataclass(frozen=True)
class GraphLaplacian:
    """Dense symmetric Laplacian with a variant tag: raw (D - A), centered (HLH), or scaled."""

    matrix: np.ndarray
    variant: str = "raw"

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def knn_graph(data, k: int) -> NeighborGraph:
    """Union-symmetrised exact Euclidean kNN graph of the rows of ``data``.

    Self is excluded; distance ties resolve to the smaller index.
    """
    V = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)
    n = V.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")

    sq = np.einsum("ij,ij->i", V, V)
    block = max(1, min(n, 4_000_000 // max(n, 1)))
    nbr = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        D2 = sq[start:stop, None] + sq[None, :] - 2.0 * (V[start:stop] @ V.T)
        D2[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        # stable sort on distances -> equal distances keep index order
        nbr[start:stop] = np.argsort(D2, axis=1, kind="stable")[:, :k]

    a = np.repeat(np.arange(n, dtype=np.int64), k)
    b = nbr.ravel()
    pairs = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    edges = np.unique(pairs, axis=0)
    degrees = np.bincount(edges.ravel(), minlength=n).astype(np.int64)
    return NeighborGraph(edges, degrees, n, k)


def laplacian(g: NeighborGraph) -> GraphLaplacian:
    """Raw graph Laplacian L = D - A."""
    L = -g.adjacency()
    L[np.diag_indices(g.n)] = g.degrees.astype(np.float64)
    return GraphLaplacian(L, "raw")


def center_laplacian(L: GraphLaplacian) -> GraphLaplacian:
    """H L H.  For an exact Laplacian (zero row sums) this equals L."""
    if L.variant != "raw":
        raise ValueError(f"expected a raw Laplacian, got variant {L.variant!r}")
    return GraphLaplacian(double_center(L.matrix), "centered")


def scale_laplacian(L: GraphLaplacian, c: float) -> GraphLaplacian:
    """c * L, tagged as the scaled variant."""
    return GraphLaplacian(c * L.matrix, "scaled")


def covariance_estimate(L: GraphLaplacian, eps: float = 1e-3) -> np.ndarray:
    """(L + eps*I)^-1 via Cholesky; the implied covariance estimate of the graph."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    A = L.matrix + eps * np.eye(L.n)
    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError as exc:
        raise ValueError(f"factorization failed; eps={eps} too small for conditioning") from exc
    S = cho_solve(factor, np.eye(L.n))
    return 0.5 * (S + S.T)


def write_edge_list(g: NeighborGraph, path) -> None:
    """Text export, one ``i j`` line per edge with i < j, sorted."""
    lines = [f"{i} {j}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
