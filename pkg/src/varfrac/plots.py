"""Optional PNG rendering for ``reproduce --figures``.

matplotlib is imported on first use with the non-interactive Agg backend,
so the numeric library never pays for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Curve:
    """Named series over a common abscissa; ``log`` draws the y axis logarithmically."""

    title: str
    xlabel: str
    x: np.ndarray
    series: dict = field(default_factory=dict)
    log: bool = False


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text).strip("_").lower()


def render(case: str, curves: list, outdir) -> list:
    """Write one PNG per curve into ``outdir``; returns the written paths."""
    if not curves:
        return []
    plt = _pyplot()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, c in enumerate(curves):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        for label, ys in c.series.items():
            ys = np.asarray(ys, dtype=float)
            if c.log:
                ys = np.maximum(np.abs(ys), 1e-17)
            style = "o-" if len(c.x) <= 16 else "-"
            ax.plot(c.x, ys, style, ms=3, lw=1.2, label=label)
        if c.log:
            ax.set_yscale("log")
        ax.set_xlabel(c.xlabel)
        ax.set_title(c.title, fontsize=10)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8, frameon=False)
        fig.tight_layout()
        path = out / f"{case}_{i:02d}_{_slug(c.title)}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
