"""Dataset and embedding I/O plus synthetic data generation.

Every seeded operation in this package draws from numpy's PCG64 generator
(``np.random.default_rng(seed)``), so identical seeds give bit-identical
output across runs and platforms.  Seeds are part of the public API.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class CsvFormatError(ValueError):
    """Raised when a CSV file violates the expected numeric layout."""


@dataclass(frozen=True)
class DataMatrix:
    """An n x d matrix of observations (rows) with optional integer labels."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if values.shape[0] < 2 or values.shape[1] < 1:
            raise ValueError("need at least 2 rows and 1 feature column")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise ValueError("labels must have exactly one entry per row")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Embedding:
    """An n x q matrix of latent coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ValueError("coords must be a non-empty 2-d array")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coords must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def q(self) -> int:
        return self.coords.shape[1]


def _try_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def load_csv(path, label_column: str | None = None) -> DataMatrix:
    """Load a numeric CSV into a :class:`DataMatrix`.

    A header row is assumed present iff the first row contains any cell
    that does not parse as a finite number.  ``label_column`` names a
    header column whose (integer) values become the labels; the remaining
    columns keep their file order.  Errors report 1-based file line and
    column locations.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        raw = [(i + 1, row) for i, row in enumerate(csv.reader(fh))]
    rows = [(line, row) for line, row in raw if any(c.strip() for c in row)]
    if not rows:
        raise CsvFormatError(f"{path}: file contains no data")

    first_line, first_row = rows[0]
    has_header = any(_try_float(c) is None for c in first_row)
    names = [c.strip() for c in first_row] if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise CsvFormatError(f"{path}: header but no data rows")

    label_idx = None
    if label_column is not None:
        if names is None or label_column not in names:
            raise CsvFormatError(f"{path}: label column {label_column!r} not found")
        label_idx = names.index(label_column)

    arity = len(data_rows[0][1])
    if names is not None and len(names) != arity:
        raise CsvFormatError(
            f"{path}: row {data_rows[0][0]} has {arity} cells but header has {len(names)}"
        )

    feats = []
    labels = [] if label_idx is not None else None
    for line, row in data_rows:
        if len(row) != arity:
            raise CsvFormatError(
                f"{path}: row {line} has {len(row)} cells, expected {arity}"
            )
        vals = []
        for j, cell in enumerate(row):
            v = _try_float(cell)
            if v is None:
                raise CsvFormatError(
                    f"{path}: row {line}, column {j + 1}: "
                    f"cannot parse {cell.strip()!r} as a finite number"
                )
            if j == label_idx:
                if v != int(v):
                    raise CsvFormatError(
                        f"{path}: row {line}, column {j + 1}: "
                        f"label {cell.strip()!r} is not an integer"
                    )
                labels.append(int(v))
            else:
                vals.append(v)
        feats.append(vals)

    values = np.asarray(feats, dtype=np.float64)
    return DataMatrix(values, np.asarray(labels, dtype=np.int64) if labels is not None else None)


def synth_blobs(n_clusters: int, per_cluster: int, d: int, spread: float, seed: int) -> DataMatrix:
    """Gaussian blobs: one centre per cluster at N(0, (10*spread)^2 I), points at N(centre, spread^2 I)."""
    if n_clusters < 1 or per_cluster < 1 or d < 1:
        raise ValueError("n_clusters, per_cluster and d must all be >= 1")
    if spread <= 0:
        raise ValueError("spread must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_clusters, d)) * (10.0 * spread)
    blocks = []
    labels = []
    for c in range(n_clusters):
        blocks.append(centers[c] + rng.standard_normal((per_cluster, d)) * spread)
        labels.append(np.full(per_cluster, c, dtype=np.int64))
    return DataMatrix(np.vstack(blocks), np.concatenate(labels))


def resample_groups(data: DataMatrix, n_groups: int, max_total: int, seed: int) -> DataMatrix:
    """Keep the ``n_groups`` most frequent labels and subsample to at most ``max_total`` rows.

    Ties in frequency are broken towards the smaller label.  Per-group
    quotas are proportional to group size with largest-remainder rounding,
    and rows within a group are drawn uniformly without replacement.
    Selected rows keep their original relative order.
    """
    if data.labels is None:
        raise ValueError("resample_groups requires labelled data")
    if n_groups < 1:
        raise ValueError("n_groups must be >= 1")
    if max_total < 2:
        raise ValueError("max_total must be >= 2 (a DataMatrix needs at least 2 rows)")
    uniq, counts = np.unique(data.labels, return_counts=True)
    if len(uniq) < n_groups:
        raise ValueError(f"only {len(uniq)} distinct labels, need {n_groups}")

    order = sorted(range(len(uniq)), key=lambda i: (-counts[i], uniq[i]))
    kept = [uniq[i] for i in order[:n_groups]]
    kept_counts = np.array([counts[i] for i in order[:n_groups]], dtype=np.int64)
    total = int(kept_counts.sum())
    if total < 2:
        raise ValueError("selected groups contain fewer than 2 rows")

    if max_total < n_groups:
        raise ValueError(f"max_total={max_total} cannot keep one row from each of {n_groups} groups")

    rng = np.random.default_rng(seed)
    if total <= max_total:
        quotas = kept_counts
    else:
        exact = max_total * kept_counts / total
        quotas = np.floor(exact).astype(np.int64)
        rem = exact - quotas
        leftover = max_total - int(quotas.sum())
        # hand out the leftover units to the largest remainders, ties to smaller label
        for i in sorted(range(n_groups), key=lambda i: (-rem[i], kept[i]))[:leftover]:
            quotas[i] += 1
        # every kept group must survive; take from the largest quota (ties to
        # smaller label) until no group is starved
        while np.any(quotas == 0):
            starved = int(np.flatnonzero(quotas == 0)[0])
            donor = min(range(n_groups), key=lambda i: (-quotas[i], kept[i]))
            quotas[donor] -= 1
            quotas[starved] += 1

    selected = []
    for label, quota in sorted(zip(kept, quotas), key=lambda t: t[0]):
        idx = np.flatnonzero(data.labels == label)
        selected.append(np.sort(rng.permutation(idx)[:quota]))
    selected = np.sort(np.concatenate(selected))
    return DataMatrix(data.values[selected], data.labels[selected])


def _fmt_float(v: float) -> str:
    # shortest round-trip repr, with the redundant ".0" of integral values dropped
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def save_embedding(emb: Embedding, labels: np.ndarray | None, path) -> None:
    """Write an embedding CSV with header ``id,x1,...,xq[,label]`` at full float precision."""
    if labels is not None and len(labels) != emb.n:
        raise ValueError("labels must have one entry per embedding row")
    header = ["id"] + [f"x{j + 1}" for j in range(emb.q)]
    if labels is not None:
        header.append("label")
    lines = [",".join(header)]
    for i in range(emb.n):
        cells = [str(i)] + [_fmt_float(v) for v in emb.coords[i]]
        if labels is not None:
            cells.append(str(int(labels[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_embedding(path) -> tuple[Embedding, np.ndarray | None]:
    """Read an embedding CSV written by :func:`save_embedding`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if any(c.strip() for c in row)]
    if not rows or not rows[0] or rows[0][0] != "id":
        raise CsvFormatError(f"{path}: not an embedding CSV (missing 'id' header)")
    names = rows[0]
    has_labels = names[-1] == "label"
    q = len(names) - 1 - (1 if has_labels else 0)
    if q < 1:
        raise CsvFormatError(f"{path}: no coordinate columns")
    coords = np.empty((len(rows) - 1, q), dtype=np.float64)
    labels = np.empty(len(rows) - 1, dtype=np.int64) if has_labels else None
    for i, row in enumerate(rows[1:]):
        if len(row) != len(names):
            raise CsvFormatError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(names)}")
        coords[i] = [float(c) for c in row[1 : 1 + q]]
        if has_labels:
            labels[i] = int(row[-1])
    return Embedding(coords), labels
