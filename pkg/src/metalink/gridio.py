"""Text export/import of sampled fields and phase profiles.

Format: comment header carrying the grid metadata, then one row per
node in row-major order::

    # nx=256, ny=256, dx=0.0046875, dy=0.0046875, cx=0, cy=0, stage=S1
    x,y,re,im
    ...

Values are written with 12 significant digits, which round-trips the
power sums to better than 1e-9 relative.
"""

from __future__ import annotations

import numpy as np

from .field import ComplexField, GridSpec

_FMT = "%.12g"


def _header(grid: GridSpec, stage: str) -> str:
    return (
        f"# nx={grid.nx}, ny={grid.ny}, "
        f"dx={_FMT % grid.dx}, dy={_FMT % grid.dy}, "
        f"cx={_FMT % grid.cx}, cy={_FMT % grid.cy}, stage={stage}"
    )


def save_field_csv(f: ComplexField, path) -> None:
    x, y = f.grid.meshgrid()
    cols = np.column_stack(
        [x.ravel(), y.ravel(), f.samples.real.ravel(), f.samples.imag.ravel()]
    )
    _write(path, _header(f.grid, f.stage_label), "x,y,re,im", cols)


def save_phase_csv(profile, path, wrap: bool = False) -> None:
    """Export a phase profile as x,y,theta rows; optionally wrapped to [-pi, pi)."""
    theta = profile.theta
    if wrap:
        theta = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    x, y = profile.grid.meshgrid()
    cols = np.column_stack([x.ravel(), y.ravel(), theta.ravel()])
    _write(path, _header(profile.grid, profile.recipe), "x,y,theta", cols)


def _write(path, header: str, columns: str, data: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        fh.write(columns + "\n")
        for row in data:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def load_field_csv(path) -> ComplexField:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError(f"{path}: missing grid header line")
        meta = {}
        for part in header[2:].split(", "):
            key, _, val = part.partition("=")
            meta[key] = val
        fh.readline()  # column names
        data = np.loadtxt(fh, delimiter=",")
    grid = GridSpec(
        nx=int(meta["nx"]), ny=int(meta["ny"]),
        dx=float(meta["dx"]), dy=float(meta["dy"]),
        cx=float(meta["cx"]), cy=float(meta["cy"]),
    )
    samples = (data[:, 2] + 1j * data[:, 3]).reshape(grid.nx, grid.ny)
    return ComplexField(grid, samples, meta.get("stage", ""))
