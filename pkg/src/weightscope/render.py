"""Static PNG rendering of heatmaps and profiles."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CMAP = "viridis"
_PNG_META = {"Software": None}


def color_scale(values: np.ndarray) -> tuple[float, float]:
    """Colour limits from the off-diagonal entries (the diagonal is trivially 1)."""
    n = values.shape[0]
    off = values[~np.eye(n, dtype=bool)] if n > 1 else values.ravel()
    lo, hi = float(off.min()), float(off.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def heatmap_png(values: np.ndarray, path, title: str = "", labels=None) -> dict:
    """Write the heatmap and a ``.scale.json`` sidecar holding its colour limits."""
    path = Path(path)
    vmin, vmax = color_scale(values)
    fig, ax = plt.subplots(figsize=(6, 5), dpi=100)
    im = ax.imshow(values, cmap=CMAP, vmin=vmin, vmax=vmax, interpolation="nearest")
    fig.colorbar(im, ax=ax)
    if labels is not None and len(labels) <= 40:
        ax.set_xticks(range(len(labels)), labels, fontsize=6)
        ax.set_yticks(range(len(labels)), labels, fontsize=6)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    scale = {"cmap": CMAP, "vmin": vmin, "vmax": vmax, "diagonal_excluded": True}
    path.with_suffix(".scale.json").write_text(json.dumps(scale, indent=2) + "\n")
    return scale


def profile_png(series: dict[str, tuple[np.ndarray, np.ndarray]], path, title: str = "",
                xlabel: str = "", ylabel: str = "", bands: dict | None = None) -> None:
    """Line plot of named (x, y) series with optional +/- std bands."""
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for name, (x, y) in series.items():
        ax.plot(x, y, label=name, linewidth=1.2)
        if bands and name in bands:
            ax.fill_between(x, y - bands[name], y + bands[name], alpha=0.2)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
