"""Embedding fits: full-batch Adam with linear rate decay, plus spectral and PCA baselines.

Fits are full-batch ascent on the chosen objective.  The embedding is
column-centered at initialisation and re-projected onto zero column mean
after every step: the log-det term of the Wishart objectives is unbounded
along the Laplacian's constant null directions (eigenvalue 0 makes the
optimal scale diverge), so the well-posed MAP problem lives in the
quotient orthogonal to them; for the translation-invariant objectives the
projection changes nothing.  Practical ceiling on CPU is a few thousand
points for the Wishart kinds (one dense factorization per epoch).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, svd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dataio import DataMatrix, Embedding
from .graph import GraphLaplacian, NeighborGraph, center_laplacian, knn_graph, laplacian
from .objectives import ObjectiveSpec, objective_value


class FitDivergedError(RuntimeError):
    """Objective became non-finite; carries the last finite state."""

    def __init__(self, message, last_embedding, trace):
        super().__init__(message)
        self.last_embedding = last_embedding
        self.trace = trace


@dataclass(frozen=True)
class OptimizerConfig:
    lr0: float = 1.0
    epochs: int = 200
    decay: str = "linear"  # linear | none
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    init: str = "spectral"  # pca | spectral | random
    init_scale: float = 1e-2

    def __post_init__(self):
        if self.lr0 <= 0 or self.epochs < 1:
            raise ValueError("lr0 must be positive and epochs >= 1")
        if self.decay not in ("linear", "none"):
            raise ValueError(f"unknown decay {self.decay!r}")
        if self.init not in ("pca", "spectral", "random"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class FitReport:
    objective_trace: np.ndarray
    final_value: float
    wall_time: float
    config_echo: OptimizerConfig = field(repr=False)


def learning_rate(cfg: OptimizerConfig, epoch: int) -> float:
    """Rate at a 0-based epoch: lr0 * (1 - epoch/epochs) under linear decay."""
    if cfg.decay == "linear":
        return cfg.lr0 * (1.0 - epoch / cfg.epochs)
    return cfg.lr0


def laplacian_eigenmaps(L: GraphLaplacian, q: int) -> Embedding:
    """Eigenvectors of the q smallest nonzero Laplacian eigenvalues.

    One constant eigenvector per connected component is skipped (the
    component count is read off the sparsity pattern, not an eigenvalue
    threshold).  Each column is sign-fixed so its largest-magnitude entry
    is positive.
    """
    if L.variant != "raw":
        raise ValueError(f"expected a raw Laplacian, got variant {L.variant!r}")
    n = L.n
    off = np.abs(L.matrix - np.diag(np.diag(L.matrix))) > 0
    ncomp, _ = connected_components(csr_matrix(off), directed=False)
    if q < 1 or q >= n - ncomp + 1:
        raise ValueError(f"q={q} out of range for n={n} with {ncomp} component(s)")
    _, vecs = eigh(L.matrix)
    cols = vecs[:, ncomp : ncomp + q].copy()
    return Embedding(_fix_signs(cols))


def _fix_signs(cols: np.ndarray) -> np.ndarray:
    # first index within 1e-12 of the max magnitude, so eigensolver noise
    # cannot flip which entry anchors the sign
    for j in range(cols.shape[1]):
        mags = np.abs(cols[:, j])
        i = int(np.argmax(mags >= mags.max() * (1.0 - 1e-12)))
        if cols[i, j] < 0:
            cols[:, j] = -cols[:, j]
    return cols


def pca_init(data: DataMatrix, q: int, scale: float = 1.0) -> Embedding:
    """Column-centered data projected on the top-q principal directions, times scale."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if q < 1 or q > min(data.n, data.d):
        raise ValueError(f"q={q} must be in [1, min(n, d)] = [1, {min(data.n, data.d)}]")
    Yc = data.values - data.values.mean(axis=0)
    _, _, Vt = svd(Yc, full_matrices=False)
    X = (Yc @ Vt[:q].T) * scale
    return Embedding(_fix_signs(X))


def _initial_embedding(cfg, q, data, lap, rng) -> np.ndarray:
    if cfg.init == "pca":
        if data is None:
            raise ValueError("pca init needs a DataMatrix source")
        return pca_init(data, q, 1.0).coords.copy()
    if cfg.init == "spectral":
        X = laplacian_eigenmaps(lap, q).coords.copy()
        sd = X.std(axis=0)
        return X / np.maximum(sd, 1e-12)
    X = rng.standard_normal((lap.n, q)) * cfg.init_scale
    return X - X.mean(axis=0)


def fit(
    source,
    spec: ObjectiveSpec,
    cfg: OptimizerConfig,
    q: int,
    x0: Embedding | None = None,
) -> tuple[Embedding, FitReport]:
    """Fit an embedding by full-batch Adam ascent on the spec's objective.

    ``source`` is a DataMatrix (a kNN graph with k = spec.n_neigh is built
    from it) or a prebuilt NeighborGraph.  ``x0`` overrides cfg.init with
    an explicit starting embedding.  The trace records the objective at
    the start of each epoch; identical seeds give identical results.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if isinstance(source, DataMatrix):
        data = source
        if q > data.d:
            raise ValueError(f"q={q} exceeds data dimension d={data.d}")
        g = knn_graph(data, min(spec.n_neigh, data.n - 1))
    elif isinstance(source, NeighborGraph):
        data, g = None, source
    else:
        raise TypeError("source must be a DataMatrix or NeighborGraph")

    lap_raw = laplacian(g)
    lap = center_laplacian(lap_raw) if spec.kind in ("wishart_umap", "wishart_negtsne") else lap_raw

    rng = np.random.default_rng(cfg.seed)
    if x0 is not None:
        if x0.coords.shape != (g.n, q):
            raise ValueError(f"x0 has shape {x0.coords.shape}, expected ({g.n}, {q})")
        X = x0.coords.copy()
    else:
        X = _initial_embedding(cfg, q, data, lap_raw, rng)

    spec = spec.resolved(g.n)
    m = np.zeros_like(X)
    v = np.zeros_like(X)
    trace = np.empty(cfg.epochs)
    t0 = time.perf_counter()
    for e in range(cfg.epochs):
        res = objective_value(spec, X, graph=g, lap=lap)
        if not (np.isfinite(res.value) and np.all(np.isfinite(res.gradient))):
            raise FitDivergedError(
                f"objective became non-finite at epoch {e}",
                Embedding(X),
                trace[:e].copy(),
            )
        trace[e] = res.value
        lr = learning_rate(cfg, e)
        t = e + 1
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * res.gradient
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * res.gradient**2
        m_hat = m / (1.0 - cfg.adam_beta1**t)
        v_hat = v / (1.0 - cfg.adam_beta2**t)
        X = X + lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
        X = X - X.mean(axis=0)

    final = objective_value(spec, X, graph=g, lap=lap).value
    report = FitReport(trace, float(final), time.perf_counter() - t0, cfg)
    return Embedding(X), report


def grad_check(spec: ObjectiveSpec, n: int, q: int, seed: int) -> float:
    """Max relative error of the analytic gradient against central finite differences.

    Builds one random instance (points, kNN graph, embedding) and compares
    entrywise with denominator max(|analytic|, |numeric|, 1e-8).  Dense FD
    is only affordable at small n.
    """
    if n > 64:
        raise ValueError("grad_check is meant for n <= 64")
    rng = np.random.default_rng(seed)
    pts = DataMatrix(rng.standard_normal((n, 3)))
    g = knn_graph(pts, min(spec.n_neigh, n - 1))
    lap_raw = laplacian(g)
    lap = center_laplacian(lap_raw) if spec.kind in ("wishart_umap", "wishart_negtsne") else lap_raw
    X0 = rng.standard_normal((n, q)) * 0.8
    spec = spec.resolved(n)

    def value_at(flat):
        return objective_value(spec, flat.reshape(n, q), graph=g, lap=lap).value

    analytic = objective_value(spec, X0, graph=g, lap=lap).gradient.ravel()
    flat = X0.ravel().copy()
    h = 1e-4 * max(1.0, np.abs(flat).max())
    numeric = np.empty_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        # fourth-order central stencil; the objectives' third derivatives are
        # large enough that the plain two-point scheme's h^2 truncation bites
        vals = []
        for step in (2 * h, h, -h, -2 * h):
            flat[i] = orig + step
            vals.append(value_at(flat))
        flat[i] = orig
        f2p, f1p, f1m, f2m = vals
        numeric[i] = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float((np.abs(analytic - numeric) / denom).max())
