"""Reader for the metalink CSV grid contract.

A grid file is a comment header carrying the grid metadata, a column
line, then one ``x,y,re,im`` row per node in row-major order::

    # nx=256, ny=256, dx=0.0046875, dy=0.0046875, cx=0, cy=0, stage=S2
    x,y,re,im
    ...

Node ``(i, j)`` sits at ``(cx + (i - (nx-1)/2) dx, cy + (j - (ny-1)/2) dy)``
and the rows iterate ``j`` fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

_HEADER_KEYS = ("nx", "ny", "dx", "dy", "cx", "cy", "stage")


class GridParseError(ValueError):
    """A grid file violates the CSV contract; the message names the line."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    dx: float
    dy: float
    cx: float
    cy: float
    stage: str
    samples: np.ndarray  # complex, shape (nx, ny)

    @property
    def x(self) -> np.ndarray:
        return self.cx + (np.arange(self.nx) - (self.nx - 1) / 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.cy + (np.arange(self.ny) - (self.ny - 1) / 2) * self.dy

    @property
    def power_density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    @property
    def extent(self):
        """(left, right, bottom, top) of the cell edges, in meters."""
        return (
            self.x[0] - self.dx / 2, self.x[-1] + self.dx / 2,
            self.y[0] - self.dy / 2, self.y[-1] + self.dy / 2,
        )


def read_grid_csv(path) -> Grid:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise GridParseError(f"{path}, line 1: expected '# nx=...' header")
        meta = {}
        for part in header[2:].split(", "):
            key, sep, val = part.partition("=")
            if not sep:
                raise GridParseError(f"{path}, line 1: malformed entry {part!r}")
            meta[key] = val
        missing = [k for k in _HEADER_KEYS if k not in meta]
        if missing:
            raise GridParseError(f"{path}, line 1: header missing {missing}")
        columns = fh.readline().strip()
        if columns != "x,y,re,im":
            raise GridParseError(f"{path}, line 2: expected 'x,y,re,im'")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise GridParseError(f"{path}: bad data row: {exc}") from exc

    try:
        nx, ny = int(meta["nx"]), int(meta["ny"])
        dx, dy = float(meta["dx"]), float(meta["dy"])
        cx, cy = float(meta["cx"]), float(meta["cy"])
    except ValueError as exc:
        raise GridParseError(f"{path}, line 1: non-numeric metadata: {exc}") from exc

    if data.shape != (nx * ny, 4):
        raise GridParseError(
            f"{path}: expected {nx * ny} rows of 4 values, got {data.shape}"
        )
    samples = (data[:, 2] + 1j * data[:, 3]).reshape(nx, ny)
    return Grid(nx=nx, ny=ny, dx=dx, dy=dy, cx=cx, cy=cy,
                stage=meta["stage"], samples=samples)


def read_summary(path) -> dict:
    """Flat ``key = value`` summary file; values parse as float when they can."""
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, sep, val = line.partition(" = ")
        if not sep:
            continue
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = val
    return out
