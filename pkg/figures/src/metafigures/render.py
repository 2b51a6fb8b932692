"""Heatmap and surface rendering of grid exports.

Two outputs per job:

* one styled multi-panel image (axes in meters, per-panel colorbar in
  |S|^2 units, each panel normalized to its own maximum), and
* one raw grayscale raster per panel at exactly one pixel per grid
  cell, for pixel-accurate downstream checks.

Raw raster convention: column c is grid index ``i`` (x increases to
the right) and row r is grid index ``ny - 1 - j`` (y increases
upward), intensity ``|S|^2`` normalized to the panel maximum.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .gridcsv import Grid, read_grid_csv

RENDER_MODES = ("heatmap", "surface")


@dataclass(frozen=True)
class PanelSpec:
    grid_file: str
    title: str
    mode: str = "heatmap"

    def __post_init__(self):
        if self.mode not in RENDER_MODES:
            raise ValueError(f"render mode must be one of {RENDER_MODES}")


@dataclass(frozen=True)
class FigureJob:
    panels: tuple
    output: str
    raw_rasters: bool = True
    dpi: int = 150

    def __post_init__(self):
        if not self.panels:
            raise ValueError("job has no panels")
        for p in self.panels:
            if not Path(p.grid_file).is_file():
                raise FileNotFoundError(p.grid_file)


def normalized_power(grid: Grid) -> np.ndarray:
    """|S|^2 scaled to the panel's own maximum; all-zero grids stay zero."""
    p = grid.power_density
    peak = p.max()
    return p / peak if peak > 0 else p


def raster_image(grid: Grid) -> np.ndarray:
    """One-pixel-per-cell grayscale image per the raw raster convention."""
    return normalized_power(grid).T[::-1, :]


def _slug(title: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", title).strip("_").lower() or "panel"


def _draw_heatmap(ax, fig, grid: Grid, title: str):
    img = ax.imshow(
        raster_image(grid), extent=grid.extent, origin="upper",
        cmap="viridis", vmin=0.0, vmax=1.0, aspect="equal",
        interpolation="nearest",
    )
    ax.set_title(title)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    peak = grid.power_density.max()
    bar = fig.colorbar(img, ax=ax, fraction=0.046, pad=0.04)
    bar.set_label(rf"$|S|^2$ / {peak:.3g} m$^{{-2}}$")


def _draw_surface(ax, fig, grid: Grid, title: str):
    x, y = np.meshgrid(grid.x, grid.y, indexing="ij")
    ax.plot_surface(x, y, normalized_power(grid), cmap="viridis",
                    linewidth=0, antialiased=False)
    ax.set_title(title)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel(r"$|S|^2$ (panel max = 1)")


def render(job: FigureJob) -> list:
    """Render one styled multi-panel image plus per-panel raw rasters.

    Returns the list of written paths; inputs are never modified and
    identical inputs produce identical outputs.
    """
    grids = [read_grid_csv(p.grid_file) for p in job.panels]
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []

    n = len(job.panels)
    fig = plt.figure(figsize=(4.4 * n, 4.0))
    for i, (panel, grid) in enumerate(zip(job.panels, grids), start=1):
        if panel.mode == "surface":
            ax = fig.add_subplot(1, n, i, projection="3d")
            _draw_surface(ax, fig, grid, panel.title)
        else:
            ax = fig.add_subplot(1, n, i)
            _draw_heatmap(ax, fig, grid, panel.title)
    fig.tight_layout()
    fig.savefig(out, dpi=job.dpi, metadata={"Software": "metalink-figures"})
    plt.close(fig)
    written.append(out)

    if job.raw_rasters:
        for i, (panel, grid) in enumerate(zip(job.panels, grids), start=1):
            raw = out.with_name(f"{out.stem}_{i}_{_slug(panel.title)}_raw.png")
            plt.imsave(raw, raster_image(grid), cmap="gray",
                       vmin=0.0, vmax=1.0,
                       metadata={"Software": "metalink-figures"})
            written.append(raw)
    return written
