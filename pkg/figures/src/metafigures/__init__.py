"""Figure rendering for metalink CSV grid exports.

Consumes only the on-disk contract of the core package (the CSV grid
format and the flat key/value summary file); it does not import the
core library.
"""

from .gridcsv import Grid, GridParseError, read_grid_csv, read_summary
from .render import FigureJob, PanelSpec, render

__all__ = [
    "Grid",
    "GridParseError",
    "read_grid_csv",
    "read_summary",
    "FigureJob",
    "PanelSpec",
    "render",
]

__version__ = "0.1.0"
