"""Acceptance gate: one test per release criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines; every tolerance is fixed here, nothing is calibrated at runtime.
"""

import math
import time

import numpy as np
import pytest
from helpers import graph_from_edges, knn_label_agreement
from scipy.linalg import subspace_angles

from wishmap.cli import main as cli_main
from wishmap.dataio import DataMatrix, load_embedding
from wishmap.diststats import mc_verify_distances
from wishmap.graph import knn_graph, laplacian
from wishmap.kernels import log_ansatz
from wishmap.objectives import ObjectiveSpec, bernoulli_loglik, cne_objective, epsilon_tilde, negtsne_rescaling_check, spec_param
from wishmap.optim import OptimizerConfig, fit, laplacian_eigenmaps
from wishmap.verify import suite_gradients, suite_psd


def _report(num, name, ok, detail):
    print(f"[acceptance] criterion {num} ({name}): {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def test_criterion_1_inequality_suite():
    t0 = time.perf_counter()
    x = np.logspace(-6, 6, 10_000)
    viol_log = int(np.sum(np.log1p(1.0 / x) < 1.0 / (1.0 + x)))

    rng = np.random.default_rng(0)
    eps = rng.uniform(1e-6, 1.0, 10_000)
    p = rng.uniform(1e-9, 1.0 - 1e-9, 10_000)
    viol_bern = int(np.sum(np.log1p(-eps * p) < eps * np.log1p(-p)))

    viol_chain = 0
    for _ in range(100):
        n = int(rng.integers(5, 51))
        q = int(rng.integers(1, 4))
        mask = rng.random((n, n))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j] < 0.25]
        g = graph_from_edges(edges or [(0, 1)], n)
        X = rng.standard_normal((n, q))
        e = float(rng.uniform(0.05, 1.0))
        lhs = cne_objective(X, g, ObjectiveSpec("cne", eps_tilde=e)).value + len(g.edges) * math.log(e)
        rhs = bernoulli_loglik(X, g, ObjectiveSpec("bernoulli", eps_tilde=e)).value
        viol_chain += rhs < lhs - 1e-9
    elapsed = time.perf_counter() - t0
    ok = viol_log == 0 and viol_bern == 0 and viol_chain == 0 and elapsed < 5.0
    _report(1, "inequality suite", ok,
            f"violations log={viol_log} bernoulli={viol_bern} chain={viol_chain}, {elapsed:.2f}s < 5s")


def test_criterion_2_gradient_suite():
    t0 = time.perf_counter()
    checks = suite_gradients(seed=0)  # 6 kinds x 10 instances, n <= 16, q in {1,2,3}
    worst = max(c.worst for c in checks)
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and worst <= 1e-5 and elapsed < 30.0
    _report(2, "gradient suite", ok, f"max relative FD error {worst:.3e} <= 1e-5, {elapsed:.1f}s < 30s")


def test_criterion_3_psd_suite():
    t0 = time.perf_counter()
    checks = suite_psd(seed=0)  # 50 instances of all three constructions
    worst = min(c.worst for c in checks)
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 10.0
    _report(3, "psd suite", ok,
            f"min normalised eigenvalue {worst:.3e} >= -1e-8, {elapsed:.1f}s < 10s")


def test_criterion_4_ansatz_suite():
    eps_grid = np.logspace(-3, 0, 20)
    val_err = max(abs(log_ansatz(e, e) - math.log(e)) for e in eps_grid)
    der_err = 0.0
    for e in eps_grid:
        h = 1e-4 * e
        fd = (log_ansatz(e + h, e) - log_ansatz(e - h, e)) / (2.0 * h)
        der_err = max(der_err, abs(fd - 1.0 / e) / (1.0 / e))
    ok = val_err <= 1e-12 and der_err <= 1e-6
    _report(4, "ansatz suite", ok,
            f"value error {val_err:.2e} <= 1e-12, FD derivative error {der_err:.2e} <= 1e-6")


def _connected_gapped_graphs(count=20, k=3):
    """Deterministic scan: connected kNN graphs with an identifiable 2-d bottom subspace."""
    out = []
    seed = 0
    while len(out) < count:
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 31))
        g = knn_graph(DataMatrix(rng.standard_normal((n, 2))), k)
        seed += 1
        if g.n_components() != 1:
            continue
        w = np.linalg.eigvalsh(laplacian(g).matrix)
        if (w[3] - w[2]) / max(w[3], 1e-12) < 0.05:
            continue  # q=2 target subspace not identifiable
        out.append(g)
    return out


def test_criterion_5_spectral_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for i, g in enumerate(_connected_gapped_graphs(20)):
        cfg = OptimizerConfig(lr0=0.1, epochs=3000, seed=i, init="random")
        emb, _ = fit(g, ObjectiveSpec("wishart_le"), cfg, 2)
        target = laplacian_eigenmaps(laplacian(g), 2).coords
        worst = max(worst, float(subspace_angles(emb.coords, target).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-2 and elapsed < 120.0
    _report(5, "spectral equivalence", ok,
            f"largest principal angle {worst:.3e} <= 1e-2 over 20 graphs, {elapsed:.1f}s < 120s")


def test_criterion_6_distance_distribution_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    A = rng.standard_normal((8, 8))
    K = A @ A.T / 8.0 + 0.5 * np.eye(8)
    reports = [
        mc_verify_distances(np.eye(4), d=10, n_samples=10_000, seed=2),
        mc_verify_distances(K, d=64, n_samples=10_000, seed=3),
    ]
    elapsed = time.perf_counter() - t0
    worst_z = max(r.max_z for r in reports)
    ks_ok = all(r.ks_statistic <= r.ks_threshold for r in reports)
    ok = worst_z <= 5.0 and ks_ok and elapsed < 60.0
    _report(6, "distance distribution suite", ok,
            f"max |z| {worst_z:.2f} <= 5 at 1e4 samples, KS at 1e-3 {'ok' if ks_ok else 'FAILED'}, "
            f"{elapsed:.1f}s < 60s")


def test_criterion_7_rescaling_suite():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 31))
        q = int(rng.integers(1, 4))
        X = rng.standard_normal((n, q)) * rng.uniform(0.3, 2.0)
        s = float(np.exp(rng.uniform(np.log(0.1), np.log(3.0))))
        spec = ObjectiveSpec("wishart_negtsne", eps_tilde=0.5, s_tilde=s)
        worst = max(worst, negtsne_rescaling_check(X, spec))
    exact = spec_param(5, 1000) == 0.5 and epsilon_tilde(5, 15, 1000) == 0.1
    ok = worst <= 1e-10 and exact
    _report(7, "neg-t-SNE rescaling suite", ok,
            f"max scale-matrix discrepancy {worst:.2e} <= 1e-10, constants exact: {exact}")


BLOBS_ARGS = ["--synthetic", "blobs:3:100:10", "--seed", "0", "--k", "15",
              "--q", "2", "--epochs", "200", "--lr", "1.0"]


@pytest.fixture(scope="module")
def umap_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    dirs = (root / "run1", root / "run2")
    for d in dirs:
        code = cli_main(["fit", *BLOBS_ARGS, "--objective", "wishart-umap", "--out-dir", str(d)])
        assert code == 0
    return dirs


def test_criterion_8_end_to_end(umap_runs, tmp_path):
    t0 = time.perf_counter()
    emb, labels = load_embedding(umap_runs[0] / "embedding.csv")
    agree_umap = knn_label_agreement(emb.coords, labels, k=15)
    trace = np.loadtxt(umap_runs[0] / "trace.csv", delimiter=",", skiprows=1)
    ascent = trace[-1, 1] > trace[0, 1]

    le_dir = tmp_path / "le"
    assert cli_main(["fit", *BLOBS_ARGS, "--objective", "wishart-le", "--out-dir", str(le_dir)]) == 0
    emb_le, labels_le = load_embedding(le_dir / "embedding.csv")
    agree_le = knn_label_agreement(emb_le.coords, labels_le, k=15)
    elapsed = time.perf_counter() - t0

    ok = agree_umap >= 0.95 and ascent and agree_le >= 0.90 and elapsed < 180.0
    _report(8, "end-to-end desk-scale experiment", ok,
            f"15-NN agreement umap={agree_umap:.3f} >= 0.95 (ascent={ascent}), "
            f"le={agree_le:.3f} >= 0.90, {elapsed:.1f}s < 180s")


def test_criterion_9_determinism(umap_runs):
    a, b = umap_runs
    same = (a / "embedding.csv").read_bytes() == (b / "embedding.csv").read_bytes()
    _report(9, "byte-identical determinism", same,
            "two seeded runs produced identical embedding.csv" if same else "outputs differ")
