"""Dependency-free SVG scatter writer for 2-d embeddings.

Emits plain text with a fixed 800x800 viewport, equal axis scaling, one
circle element per point, and a legend when labels are present.  No
timestamps or other metadata, so identical inputs give identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

VIEW = 800
MARGIN = 50


def scatter_svg(coords: np.ndarray, labels: np.ndarray | None, path, radius: float = 3.0) -> None:
    """Write a labelled scatter plot of an n x 2 coordinate array as SVG."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"need a 2-d embedding to plot, got q={coords.shape[-1] if coords.ndim == 2 else '?'}")
    if labels is not None and len(labels) != len(coords):
        raise ValueError("labels must have one entry per point")

    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = max(float(hi[0] - lo[0]), float(hi[1] - lo[1]), 1e-12)
    mid = 0.5 * (lo + hi)
    inner = VIEW - 2 * MARGIN
    scale = inner / span

    def to_px(p):
        x = MARGIN + inner / 2 + (p[0] - mid[0]) * scale
        y = MARGIN + inner / 2 - (p[1] - mid[1]) * scale  # SVG y grows downward
        return x, y

    if labels is not None:
        uniq = sorted(int(v) for v in np.unique(labels))
        color_of = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(uniq)}
    else:
        uniq, color_of = [], {}

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" height="{VIEW}" '
        f'viewBox="0 0 {VIEW} {VIEW}">',
        f'<rect width="{VIEW}" height="{VIEW}" fill="white"/>',
    ]
    for i, p in enumerate(coords):
        x, y = to_px(p)
        color = color_of[int(labels[i])] if labels is not None else PALETTE[0]
        lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:g}" fill="{color}" fill-opacity="0.8"/>')
    for i, lab in enumerate(uniq):
        y = MARGIN + 18 * i
        lines.append(f'<rect x="{VIEW - MARGIN - 60}" y="{y}" width="12" height="12" fill="{color_of[lab]}"/>')
        lines.append(
            f'<text x="{VIEW - MARGIN - 42}" y="{y + 11}" font-family="sans-serif" font-size="12">{lab}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
