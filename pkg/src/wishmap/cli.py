"""Command-line pipeline: graph building, embedding fits, verification, plotting.

    wishmap graph  --input data.csv --k 15 --out-dir out/
    wishmap fit    --synthetic blobs:3:100:10 --objective wishart-umap --q 2 --out-dir out/
    wishmap verify --suite all
    wishmap plot   --embedding out/embedding.csv --out out/plot.svg

Every flag can also be supplied through ``--config file`` with ``key=value``
lines (``#`` comments allowed); explicit flags win, unknown keys are
rejected, and the fully resolved configuration is echoed to
``config.resolved`` in the output directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dataio import DataMatrix, load_csv, load_embedding, save_embedding, synth_blobs
from .graph import knn_graph, laplacian, write_edge_list
from .objectives import KINDS, ObjectiveSpec
from .optim import OptimizerConfig, fit, learning_rate
from .plotting import scatter_svg
from .verify import SUITES, format_report, run_suites

OBJECTIVES = {
    "cne": "cne",
    "bernoulli": "bernoulli",
    "wishart-umap": "wishart_umap",
    "wishart-le": "wishart_le",
    "wishart-negtsne": "wishart_negtsne",
    "unified": "wishart_unified",
}


class CliError(Exception):
    """Pipeline failure; carries the exit code."""

    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


class UsageError(CliError):
    def __init__(self, message):
        super().__init__(message, code=2)


@dataclass(frozen=True)
class Flag:
    name: str
    type: type
    default: object
    help: str


GRAPH_FLAGS = (
    Flag("input", str, None, "input CSV file"),
    Flag("label-col", str, None, "header name of the label column"),
    Flag("k", int, 15, "number of nearest neighbours"),
    Flag("out-dir", str, None, "output directory"),
)

FIT_FLAGS = (
    Flag("input", str, None, "input CSV file (features only)"),
    Flag("synthetic", str, None, "synthetic dataset, e.g. blobs:3:100:10"),
    Flag("objective", str, "wishart-umap", f"one of {', '.join(OBJECTIVES)}"),
    Flag("k", int, 15, "number of nearest neighbours"),
    Flag("q", int, 2, "embedding dimension"),
    Flag("epochs", int, 200, "total optimisation epochs"),
    Flag("lr", float, 1.0, "initial Adam learning rate"),
    Flag("seed", int, 0, "PRNG seed (PCG64)"),
    Flag("init", str, "spectral", "initialisation: pca, spectral or random"),
    Flag("alpha", float, 1.0, "unified objective kernel weight"),
    Flag("gamma", float, 1e-2, "unified objective jitter"),
    Flag("beta", float, 1e-2, "LE objective jitter"),
    Flag("pretrain-epochs", int, None, "wishart-umap pretraining epochs (default epochs//3 for wishart-negtsne, else 0)"),
    Flag("out-dir", str, None, "output directory"),
)

VERIFY_FLAGS = (
    Flag("suite", str, "all", f"one of {', '.join(SUITES)} or all"),
    Flag("seed", int, 0, "PRNG seed (PCG64)"),
)

PLOT_FLAGS = (
    Flag("embedding", str, None, "embedding CSV produced by fit"),
    Flag("out", str, None, "output SVG file"),
)


def _read_config(path, known: set[str]) -> dict[str, str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    vals = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"[config] {path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise UsageError(f"[config] {path}:{lineno}: unknown key {key!r}")
        vals[key] = value
    return vals


def _resolve(args, flags) -> dict[str, object]:
    known = {f.name for f in flags}
    file_vals = _read_config(args.config, known) if args.config else {}
    resolved = {}
    for f in flags:
        cli = getattr(args, f.name.replace("-", "_"))
        if cli is not None:
            resolved[f.name] = cli
        elif f.name in file_vals:
            try:
                resolved[f.name] = f.type(file_vals[f.name])
            except ValueError as exc:
                raise UsageError(f"[config] key {f.name!r}: {exc}") from exc
        else:
            resolved[f.name] = f.default
    return resolved


def _echo_config(resolved: dict, out_dir: Path) -> None:
    lines = [f"{k}={'' if v is None else v}" for k, v in sorted(resolved.items())]
    (out_dir / "config.resolved").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(resolved) -> Path:
    if resolved["out-dir"] is None:
        raise UsageError("[output] --out-dir is required")
    out = Path(resolved["out-dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_source(resolved, seed: int) -> DataMatrix:
    has_input = resolved.get("input") is not None
    has_synth = resolved.get("synthetic") is not None
    if has_input == has_synth:
        raise UsageError("[dataio] give exactly one of --input or --synthetic")
    if has_input:
        try:
            return load_csv(resolved["input"], resolved.get("label-col"))
        except (OSError, ValueError) as exc:
            raise CliError(f"[dataio] {exc}") from exc
    value = str(resolved["synthetic"])
    parts = value.split(":")
    if parts[0] != "blobs" or len(parts) != 4:
        raise UsageError(f"[dataio] bad --synthetic value {value!r}; expected blobs:<clusters>:<per-cluster>:<dim>")
    try:
        c, per, dim = (int(p) for p in parts[1:])
    except ValueError as exc:
        raise UsageError(f"[dataio] bad --synthetic counts in {value!r}") from exc
    return synth_blobs(c, per, dim, spread=1.0, seed=seed)


def cmd_graph(args) -> int:
    resolved = _resolve(args, GRAPH_FLAGS)
    if resolved["input"] is None:
        raise UsageError("[dataio] --input is required")
    out = _out_dir(resolved)
    try:
        data = load_csv(resolved["input"], resolved["label-col"])
    except (OSError, ValueError) as exc:
        raise CliError(f"[dataio] {exc}") from exc
    try:
        g = knn_graph(data, resolved["k"])
    except ValueError as exc:
        raise UsageError(f"[graph] {exc}") from exc
    L = laplacian(g)

    write_edge_list(g, out / "edges.txt")
    hist = np.bincount(g.degrees)
    lines = [
        f"nodes {g.n}",
        f"edges {len(g.edges)}",
        f"k {g.k}",
        f"components {g.n_components()}",
        f"degree_min {int(g.degrees.min())}",
        f"degree_max {int(g.degrees.max())}",
        f"laplacian_max_abs_row_sum {np.abs(L.matrix.sum(axis=1)).max():.3e}",
        "degree_histogram:",
    ]
    lines += [f"{deg} {int(cnt)}" for deg, cnt in enumerate(hist) if cnt > 0]
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _echo_config(resolved, out)
    print(f"graph: {g.n} nodes, {len(g.edges)} edges -> {out}")
    return 0


def _phase_rows(report, cfg, start_epoch: int):
    rows = []
    for e, value in enumerate(report.objective_trace):
        rows.append((start_epoch + e, float(value), learning_rate(cfg, e)))
    return rows


def cmd_fit(args) -> int:
    resolved = _resolve(args, FIT_FLAGS)
    if resolved["objective"] not in OBJECTIVES:
        raise UsageError(
            f"[objective] unknown objective {resolved['objective']!r}; valid: {', '.join(OBJECTIVES)}"
        )
    kind = OBJECTIVES[resolved["objective"]]
    out = _out_dir(resolved)
    seed = resolved["seed"]
    data = _load_source(resolved, seed)

    epochs = resolved["epochs"]
    pretrain = resolved["pretrain-epochs"]
    if pretrain is None:
        pretrain = epochs // 3 if kind == "wishart_negtsne" else 0
        resolved["pretrain-epochs"] = pretrain
    if not 0 <= pretrain < epochs:
        raise UsageError(f"[optim] pretrain-epochs must be in [0, epochs), got {pretrain}")

    spec = ObjectiveSpec(
        kind,
        n_neigh=resolved["k"],
        alpha=resolved["alpha"],
        gamma=resolved["gamma"],
        beta=resolved["beta"],
    )
    try:
        cfg = OptimizerConfig(lr0=resolved["lr"], epochs=epochs, seed=seed, init=resolved["init"])
    except ValueError as exc:
        raise UsageError(f"[optim] {exc}") from exc

    q = resolved["q"]
    rows = []
    try:
        if pretrain > 0:
            cfg_pre = replace(cfg, epochs=pretrain)
            emb, rep = fit(data, replace(spec, kind="wishart_umap"), cfg_pre, q)
            rows += _phase_rows(rep, cfg_pre, 0)
            cfg_main = replace(cfg, epochs=epochs - pretrain)
            emb, rep = fit(data, spec, cfg_main, q, x0=emb)
            rows += _phase_rows(rep, cfg_main, pretrain)
        else:
            emb, rep = fit(data, spec, cfg, q)
            rows += _phase_rows(rep, cfg, 0)
    except (ValueError, RuntimeError) as exc:
        raise CliError(f"[optim] {exc}") from exc

    save_embedding(emb, data.labels, out / "embedding.csv")
    trace_lines = ["epoch,objective,lr"] + [f"{e},{repr(v)},{repr(lr)}" for e, v, lr in rows]
    (out / "trace.csv").write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
    _echo_config(resolved, out)
    print(
        f"fit: {resolved['objective']} on n={data.n} q={q} "
        f"-> objective {rows[0][1]:.4f} -> {rep.final_value:.4f} ({out})"
    )
    return 0


def cmd_verify(args) -> int:
    resolved = _resolve(args, VERIFY_FLAGS)
    try:
        results, ok = run_suites(resolved["suite"], resolved["seed"])
    except ValueError as exc:
        raise UsageError(f"[verify] {exc}") from exc
    print(format_report(results))
    return 0 if ok else 1


def cmd_plot(args) -> int:
    resolved = _resolve(args, PLOT_FLAGS)
    if resolved["embedding"] is None or resolved["out"] is None:
        raise UsageError("[plot] --embedding and --out are both required")
    try:
        emb, labels = load_embedding(resolved["embedding"])
    except (OSError, ValueError) as exc:
        raise CliError(f"[plot] {exc}") from exc
    if emb.q != 2:
        raise CliError(f"[plot] embedding has q={emb.q}; plotting needs q == 2 (refit with --q 2)")
    scatter_svg(emb.coords, labels, resolved["out"])
    print(f"plot: {emb.n} points -> {resolved['out']}")
    return 0


def _add_flags(sub, flags) -> None:
    for f in flags:
        sub.add_argument(f"--{f.name}", type=f.type, default=None, help=f.help)
    sub.add_argument("--config", type=str, default=None, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wishmap",
        description="Dimensionality reduction as MAP inference on graph-Laplacian Wishart models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags, func, help_text in (
        ("graph", GRAPH_FLAGS, cmd_graph, "build a kNN graph and export edges plus Laplacian stats"),
        ("fit", FIT_FLAGS, cmd_fit, "fit an embedding and write embedding/trace CSVs"),
        ("verify", VERIFY_FLAGS, cmd_verify, "run the numerical property suites"),
        ("plot", PLOT_FLAGS, cmd_plot, "render an embedding CSV as an SVG scatter"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_flags(p, flags)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
