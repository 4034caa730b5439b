"""Embedding objectives: contrastive (CNE), Bernoulli, and Wishart MAP variants.

All values are log-likelihood-like quantities to MAXIMISE.  Pair sums run
over unordered pairs i < j, counted once; diagonal terms are excluded.
Squared distances are floored at 1e-12 before logs and divisions so that
duplicate latents stay finite.

The Wishart family evaluates

    value = -1/2 * tr(L_eff M(X)) + nu/2 * log|M(X)|

with the scale matrix M and effective Laplacian L_eff chosen per kind:

    wishart_le       M = X X^T + beta I                                L_eff = nu * L
    wishart_umap     M = I/(2 eps) + (H P_u H)/2 + X X^T               L_eff = L (centered)
    wishart_negtsne  M = I/(2 eps) + (H P_t H)/2 + s * X X^T           L_eff = L / log1p(1/s)
    wishart_unified  M = X X^T + alpha * H K_t(X) H + gamma I          L_eff = L

where P_u = 1/(1 + d^2), P_t = 1/(1 + s d^2), eps is the negative-pair
weight and s the neg-t-SNE distance scale.  Gradients are analytic:
the X X^T term contributes 2 c_x G X with G = nu/2 M^-1 - 1/2 L_eff, and
a kernel term c_k H P H contributes through the pair weights
W = c_k (H G H) * dP/dd^2, giving 4 (diag(W 1) - W) X.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .dataio import Embedding
from .graph import GraphLaplacian, NeighborGraph
from .kernels import double_center, sq_distance_matrix

KINDS = (
    "cne",
    "bernoulli",
    "wishart_umap",
    "wishart_le",
    "wishart_negtsne",
    "wishart_unified",
)

D2_FLOOR = 1e-12


def epsilon_tilde(n_neg: int, n_neigh: int, n: int) -> float:
    """Negative-pair weight 4 * n_neg * n_neigh / (3n)."""
    if n_neg < 1 or n_neigh < 1 or n < 1:
        raise ValueError("n_neg, n_neigh and n must all be >= 1")
    return 4.0 * n_neg * n_neigh / (3.0 * n)


def spec_param(n_neg: int, n: int) -> float:
    """neg-t-SNE distance scale 100 * n_neg / n."""
    if n_neg < 1 or n < 1:
        raise ValueError("n_neg and n must be >= 1")
    return 100.0 * n_neg / n


@dataclass(frozen=True)
class ObjectiveSpec:
    """Which objective to evaluate, with its scalar hyperparameters.

    ``eps_tilde``, ``s_tilde`` and ``nu`` default to None and are derived
    from the instance size n on evaluation: eps_tilde = 4*n_neg*n_neigh/(3n),
    s_tilde = 100*n_neg/n, nu = n.
    """

    kind: str
    n_neg: int = 5
    n_neigh: int = 15
    eps_tilde: float | None = None
    s_tilde: float | None = None
    nu: float | None = None
    alpha: float = 1.0
    gamma: float = 1e-2
    beta: float = 1e-2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}; valid: {', '.join(KINDS)}")
        if self.n_neg < 1 or self.n_neigh < 1:
            raise ValueError("n_neg and n_neigh must be >= 1")
        for name in ("alpha", "gamma", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("eps_tilde", "s_tilde", "nu"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when given")

    def resolved(self, n: int) -> "ObjectiveSpec":
        """Fill the size-dependent defaults for an n-point instance."""
        return replace(
            self,
            eps_tilde=self.eps_tilde if self.eps_tilde is not None else epsilon_tilde(self.n_neg, self.n_neigh, n),
            s_tilde=self.s_tilde if self.s_tilde is not None else spec_param(self.n_neg, n),
            nu=self.nu if self.nu is not None else float(n),
        )


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    gradient: np.ndarray | None = None


def _coords(X) -> np.ndarray:
    return X.coords if isinstance(X, Embedding) else np.asarray(X, dtype=np.float64)


def _pair_gradient(W: np.ndarray, X: np.ndarray, factor: float) -> np.ndarray:
    """Gradient rows factor * sum_j W_ij (x_i - x_j) for symmetric pair weights W."""
    return factor * (W.sum(axis=1)[:, None] * X - W @ X)


def cne_objective(X, g: NeighborGraph, spec: ObjectiveSpec) -> ObjectiveValue:
    """Contrastive objective: neighbour attraction plus eps-weighted non-neighbour repulsion.

    value = sum_{i<j} A_ij log(1/(1+d_ij^2))
          + eps * sum_{i<j} (1-A_ij) log(1 - 1/(1+d_ij^2))
    """
    X = _coords(X)
    n = X.shape[0]
    if g.n != n:
        raise ValueError(f"graph has {g.n} nodes but X has {n} rows")
    spec = spec.resolved(n)
    eps = spec.eps_tilde

    A = g.adjacency()
    D2 = np.maximum(sq_distance_matrix(X), D2_FLOOR)
    iu = np.triu_indices(n, 1)
    a, d2 = A[iu], D2[iu]
    value = float(
        -(a * np.log1p(d2)).sum() + eps * ((1.0 - a) * (np.log(d2) - np.log1p(d2))).sum()
    )

    W = np.where(A == 1.0, -1.0 / (1.0 + D2), eps * (1.0 / D2 - 1.0 / (1.0 + D2)))
    np.fill_diagonal(W, 0.0)
    return ObjectiveValue(value, _pair_gradient(W, X, 2.0))


def bernoulli_loglik(X, g: NeighborGraph, spec: ObjectiveSpec) -> ObjectiveValue:
    """Log-likelihood of adjacency ~ Bernoulli(eps / (1 + d_ij^2)).

    value = sum_{i<j} A_ij log(eps/(1+d_ij^2))
          + sum_{i<j} (1-A_ij) log(1 - eps/(1+d_ij^2))
    """
    X = _coords(X)
    n = X.shape[0]
    if g.n != n:
        raise ValueError(f"graph has {g.n} nodes but X has {n} rows")
    spec = spec.resolved(n)
    eps = spec.eps_tilde
    if eps > 1.0:
        raise ValueError(f"bernoulli model needs eps_tilde in (0, 1], got {eps}")

    A = g.adjacency()
    D2 = np.maximum(sq_distance_matrix(X), D2_FLOOR)
    iu = np.triu_indices(n, 1)
    a, d2 = A[iu], D2[iu]
    # 1 - eps/(1+d^2) = ((1-eps) + d^2) / (1+d^2), kept in that form for eps near 1
    log_neg = np.log((1.0 - eps) + d2) - np.log1p(d2)
    value = float((a * (np.log(eps) - np.log1p(d2))).sum() + ((1.0 - a) * log_neg).sum())

    U = 1.0 + D2
    W = np.where(A == 1.0, -1.0 / U, eps / (U * (U - eps)))
    np.fill_diagonal(W, 0.0)
    return ObjectiveValue(value, _pair_gradient(W, X, 2.0))


def _scale_matrix(kind: str, X: np.ndarray, D2: np.ndarray, spec: ObjectiveSpec):
    """The Wishart scale matrix M plus gradient coefficients (c_x, c_k, kernel scale)."""
    n = X.shape[0]
    XXt = X @ X.T
    if kind == "wishart_le":
        return XXt + spec.beta * np.eye(n), 1.0, 0.0, 1.0
    if kind == "wishart_unified":
        M = XXt + spec.gamma * np.eye(n)
        if spec.alpha > 0.0:
            M = M + spec.alpha * double_center(1.0 / (1.0 + D2))
        return M, 1.0, spec.alpha, 1.0
    if kind == "wishart_umap":
        s, c_x = 1.0, 1.0
    elif kind == "wishart_negtsne":
        s, c_x = spec.s_tilde, spec.s_tilde
    else:
        raise ValueError(f"not a wishart kind: {kind!r}")
    P = 1.0 / (1.0 + s * D2)
    M = (0.5 / spec.eps_tilde) * np.eye(n) + 0.5 * double_center(P) + c_x * XXt
    return M, c_x, 0.5, s


def wishart_objective(X, L: GraphLaplacian, spec: ObjectiveSpec) -> ObjectiveValue:
    """Wishart MAP objective -1/2 tr(L_eff M) + nu/2 log|M| for the spec's kind."""
    X = _coords(X)
    n = X.shape[0]
    if L.n != n:
        raise ValueError(f"Laplacian is {L.n}x{L.n} but X has {n} rows")
    kind = spec.kind
    if kind in ("wishart_umap", "wishart_negtsne") and L.variant != "centered":
        raise ValueError(f"{kind} requires the centered Laplacian variant, got {L.variant!r}")
    if kind == "wishart_le" and L.variant != "raw":
        raise ValueError(f"wishart_le requires the raw Laplacian variant, got {L.variant!r}")
    spec = spec.resolved(n)
    nu = spec.nu
    if nu < n:
        warnings.warn(
            f"nu={nu} < n={n}: Wishart density is not normalizable; "
            "MAP terms are unaffected",
            RuntimeWarning,
            stacklevel=2,
        )

    if kind == "wishart_le":
        L_eff = nu * L.matrix
    elif kind == "wishart_negtsne":
        L_eff = L.matrix / np.log1p(1.0 / spec.s_tilde)
    else:
        L_eff = L.matrix

    D2 = sq_distance_matrix(X)
    M, c_x, c_k, s = _scale_matrix(kind, X, D2, spec)
    try:
        factor = cho_factor(M, lower=True)
    except LinAlgError as exc:
        raise ValueError(
            "scale matrix M is not positive definite "
            "(increase gamma/beta or check eps_tilde)"
        ) from exc
    logdet = 2.0 * float(np.log(np.diag(factor[0])).sum())
    value = -0.5 * float(np.sum(L_eff * M)) + 0.5 * nu * logdet

    if c_k == 0.0:
        grad = nu * cho_solve(factor, X) - L_eff @ X
    else:
        Minv = cho_solve(factor, np.eye(n))
        G = 0.5 * nu * (0.5 * (Minv + Minv.T)) - 0.5 * L_eff
        grad = 2.0 * c_x * (G @ X)
        W = c_k * double_center(G) * (-s / (1.0 + s * D2) ** 2)
        np.fill_diagonal(W, 0.0)
        grad = grad + _pair_gradient(W, X, 4.0)
    return ObjectiveValue(value, grad)


def negtsne_rescaling_check(X, spec: ObjectiveSpec) -> float:
    """Max entrywise |M_negtsne(X) - M_umap(sqrt(s) X)|; algebraically zero."""
    X = _coords(X)
    spec = spec.resolved(X.shape[0])
    Mt, _, _, _ = _scale_matrix("wishart_negtsne", X, sq_distance_matrix(X), spec)
    Y = np.sqrt(spec.s_tilde) * X
    Mu, _, _, _ = _scale_matrix("wishart_umap", Y, sq_distance_matrix(Y), spec)
    return float(np.abs(Mt - Mu).max())


def objective_value(
    spec: ObjectiveSpec,
    X,
    graph: NeighborGraph | None = None,
    lap: GraphLaplacian | None = None,
) -> ObjectiveValue:
    """Dispatch to the evaluator for spec.kind (graph for cne/bernoulli, lap for wishart)."""
    if spec.kind == "cne":
        if graph is None:
            raise ValueError("cne objective needs a NeighborGraph")
        return cne_objective(X, graph, spec)
    if spec.kind == "bernoulli":
        if graph is None:
            raise ValueError("bernoulli objective needs a NeighborGraph")
        return bernoulli_loglik(X, graph, spec)
    if lap is None:
        raise ValueError(f"{spec.kind} objective needs a GraphLaplacian")
    return wishart_objective(X, lap, spec)
