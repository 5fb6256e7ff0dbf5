"""Report rendering: mosaic previews, reconstruction panels, and summary
charts written next to the delimited evaluation output.

Figures are drawn on explicit matplotlib ``Figure`` objects (no pyplot
state), so rendering works headless and leaks nothing between calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from matplotlib.figure import Figure

from .cfa import CfaMask
from .image import RawImage, RgbImage


@dataclass(frozen=True)
class SummaryRow:
    """One aggregated evaluation cell: a (pattern, method, noise) triple."""

    pattern: str
    method: str
    noise_std: float
    lam: float | None
    count: int
    mse_mean: float
    mse_std: float


def colorize_mosaic(y: RawImage, mask: CfaMask) -> RgbImage:
    """Tint a raw mosaic by its filter layout for previewing.

    R/G/B sites keep their sample in the matching output channel; white
    sites render gray.  The CFA geometry becomes visible at pixel zoom.
    """
    if (y.height, y.width) != (mask.height, mask.width):
        raise ValueError(
            f"raw image {y.data.shape} does not match mask "
            f"({mask.height}, {mask.width})"
        )
    h = mask.planes
    white = h[:, :, 3]
    planes = [y.data * (h[:, :, k] + white) for k in range(3)]
    return RgbImage(np.clip(np.stack(planes, axis=2), 0.0, 1.0))


def save_mse_chart(rows: list[SummaryRow], path) -> None:
    """Grouped bar chart of mean MSE (log scale, std error bars) per pattern,
    one bar per (method, noise) series."""
    if not rows:
        raise ValueError("no summary rows to chart")
    patterns = list(dict.fromkeys(r.pattern for r in rows))
    series = list(dict.fromkeys((r.method, r.noise_std) for r in rows))
    cell = {(r.pattern, r.method, r.noise_std): r for r in rows}

    fig = Figure(figsize=(1.8 + 1.6 * len(patterns), 4.0))
    ax = fig.subplots()
    x = np.arange(len(patterns))
    width = 0.8 / len(series)
    for i, (method, noise_std) in enumerate(series):
        offsets = x - 0.4 + (i + 0.5) * width
        means = [cell[(p, method, noise_std)].mse_mean if (p, method, noise_std) in cell else np.nan
                 for p in patterns]
        stds = [cell[(p, method, noise_std)].mse_std if (p, method, noise_std) in cell else 0.0
                for p in patterns]
        ax.bar(offsets, means, width=width, yerr=stds, capsize=3,
               label=f"{method}, noise {noise_std:g}")
    ax.set_xticks(x)
    ax.set_xticklabels(patterns)
    ax.set_yscale("log")
    ax.set_ylabel("mean MSE")
    ax.set_title("Reconstruction error by pattern and method")
    ax.legend(fontsize=8)
    ax.grid(axis="y", which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def save_comparison_panel(
    reference: RgbImage | None,
    items: list[tuple[str, RgbImage]],
    path,
    title: str | None = None,
) -> None:
    """Side-by-side panel: reference (if given) followed by labeled estimates."""
    panels: list[tuple[str, RgbImage]] = []
    if reference is not None:
        panels.append(("reference", reference))
    panels.extend(items)
    if not panels:
        raise ValueError("nothing to render")
    fig = Figure(figsize=(3.0 * len(panels), 3.4))
    axes = fig.subplots(1, len(panels), squeeze=False)[0]
    for ax, (label, img) in zip(axes, panels):
        ax.imshow(np.clip(img.data, 0.0, 1.0), interpolation="nearest")
        ax.set_title(label, fontsize=9)
        ax.set_axis_off()
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
