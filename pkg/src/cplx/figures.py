"""Matplotlib rendering for the report path.

Figures land next to the delimited report output: per-metric complexity
heatmaps with the samples and mined slice rectangles overlaid (2-D data
only), plus complexity histograms split by error status for any dimension.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

import numpy as np

from .analysis import Slice
from .dataset import EmbeddedDataset
from .geometry import GeometryModel
from .scoring import ComplexityRecord, DistanceKind, FEATURE_COLUMNS
from .synth import heatmap

HEATMAP_RESOLUTION = (160, 160)
MARGIN = 0.08
MAX_RECTANGLES = 3


def _bounding_region(vectors: np.ndarray):
    lo = vectors.min(axis=0)
    hi = vectors.max(axis=0)
    pad = (hi - lo) * MARGIN + 1e-9
    return (
        (float(lo[0] - pad[0]), float(hi[0] + pad[0])),
        (float(lo[1] - pad[1]), float(hi[1] + pad[1])),
    )


def render_heatmap_figure(
    dataset: EmbeddedDataset,
    model: GeometryModel,
    kind: DistanceKind,
    slices: Sequence[Slice],
    errors: np.ndarray,
    path: Path,
) -> Path:
    region = _bounding_region(dataset.vectors)
    grid = heatmap(model, region, HEATMAP_RESOLUTION, kind)
    fig, ax = plt.subplots(figsize=(7.0, 5.6))
    mesh = ax.pcolormesh(
        grid.xs, grid.ys, grid.values.T, shading="nearest", cmap="viridis", rasterized=True
    )
    fig.colorbar(mesh, ax=ax, label=f"complexity ({kind.value})")
    for label in dataset.classes:
        pts = dataset.vectors_of(label)
        ax.scatter(pts[:, 0], pts[:, 1], s=6, alpha=0.6, label=label, edgecolors="none")
    if errors.any():
        bad = dataset.vectors[errors]
        ax.scatter(bad[:, 0], bad[:, 1], s=22, marker="x", c="red", label="errors", linewidths=0.8)
    shown = 0
    for s in slices:
        if s.features != ("x1", "x2") or shown >= MAX_RECTANGLES:
            continue
        (x_lo, x_hi), (y_lo, y_hi) = s.ranges
        ax.add_patch(
            Rectangle(
                (x_lo, y_lo),
                x_hi - x_lo,
                y_hi - y_lo,
                fill=False,
                edgecolor="black",
                linewidth=1.4,
            )
        )
        shown += 1
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_xlim(*grid.x_range)
    ax.set_ylim(*grid.y_range)
    ax.legend(loc="upper right", fontsize=8, framealpha=0.9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_histogram_figure(
    records: Sequence[ComplexityRecord],
    kind: DistanceKind,
    errors: np.ndarray,
    path: Path,
) -> Path:
    values = np.asarray([r.complexity[kind.value] for r in records])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    bins = np.histogram_bin_edges(values, bins=40)
    ax.hist(values[~errors], bins=bins, alpha=0.65, label="correct", color="tab:blue")
    ax.hist(values[errors], bins=bins, alpha=0.75, label="errors", color="tab:red")
    ax.set_xlabel(f"complexity ({kind.value})")
    ax.set_ylabel("samples")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_report_figures(
    dataset: EmbeddedDataset,
    model: GeometryModel,
    records: Sequence[ComplexityRecord],
    slices: Sequence[Slice],
    errors: np.ndarray,
    directory: Path,
) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    kinds = [k for k in DistanceKind if k.value in records[0].complexity]
    written = []
    for kind in kinds:
        written.append(
            render_histogram_figure(
                records, kind, errors, directory / f"hist_{FEATURE_COLUMNS[kind]}.png"
            )
        )
    if dataset.d == 2:
        for kind in kinds:
            written.append(
                render_heatmap_figure(
                    dataset,
                    model,
                    kind,
                    slices,
                    errors,
                    directory / f"heatmap_{FEATURE_COLUMNS[kind]}.png",
                )
            )
    return written
