"""Shared oracles and instance builders for the test suite.

Oracles here are deliberately independent of the library code paths they
check (per-pair loops, explicit eigendecompositions, Python sorting).
"""

from __future__ import annotations

import numpy as np

from wishmap.graph import NeighborGraph


def graph_from_edges(edges, n: int, k: int = 1) -> NeighborGraph:
    edges = np.asarray(sorted((min(i, j), max(i, j)) for i, j in edges), dtype=np.int64).reshape(-1, 2)
    degrees = np.bincount(edges.ravel(), minlength=n).astype(np.int64)
    return NeighborGraph(edges, degrees, n, k)


def complete_graph(n: int) -> NeighborGraph:
    return graph_from_edges([(i, j) for i in range(n) for j in range(i + 1, n)], n, k=n - 1)


def path_graph(n: int) -> NeighborGraph:
    return graph_from_edges([(i, i + 1) for i in range(n - 1)], n)


def empty_graph(n: int) -> NeighborGraph:
    return NeighborGraph(np.empty((0, 2), dtype=np.int64), np.zeros(n, dtype=np.int64), n, 1)


def knn_oracle(V: np.ndarray, k: int) -> list[tuple[int, int]]:
    """Per-pair-loop kNN with (distance, index) sorting; union symmetrisation."""
    n = len(V)
    edges = set()
    for i in range(n):
        dists = sorted(
            (float(np.sum((V[i] - V[j]) ** 2)), j) for j in range(n) if j != i
        )
        for _, j in dists[:k]:
            edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def random_psd(n: int, seed: int, jitter: float = 0.1) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    return A @ A.T / n + jitter * np.eye(n)


def random_orthogonal(q: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((q, q)))
    return Q * np.sign(np.diag(R))


def procrustes_distance(X: np.ndarray, Y: np.ndarray) -> float:
    """min over orthogonal R of ||X R - Y||_F."""
    U, _, Vt = np.linalg.svd(X.T @ Y)
    return float(np.linalg.norm(X @ (U @ Vt) - Y))


def knn_label_agreement(coords: np.ndarray, labels: np.ndarray, k: int = 15) -> float:
    """Mean fraction of each point's k nearest embedding neighbours sharing its label."""
    n = len(coords)
    sq = np.einsum("ij,ij->i", coords, coords)
    D2 = sq[:, None] + sq[None, :] - 2.0 * coords @ coords.T
    np.fill_diagonal(D2, np.inf)
    nn = np.argsort(D2, axis=1, kind="stable")[:, :k]
    return float((labels[nn] == labels[:, None]).mean())
