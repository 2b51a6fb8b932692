"""Command-line front end.

Panels are given as ``file.csv[:title[:mode]]`` arguments::

    metalink-figures --out fig8.png out/fig8/S1.csv:Tx out/fig8/S2.csv:Rx

mode is ``heatmap`` (default) or ``surface``.  Exit codes: 0 success,
2 a referenced grid file is missing or malformed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .gridcsv import GridParseError
from .render import FigureJob, PanelSpec, render


def parse_panel(arg: str) -> PanelSpec:
    parts = arg.split(":")
    if len(parts) > 3:
        raise ValueError(f"panel {arg!r}: expected file[:title[:mode]]")
    grid_file = parts[0]
    title = parts[1] if len(parts) > 1 and parts[1] else Path(grid_file).stem
    mode = parts[2] if len(parts) > 2 else "heatmap"
    return PanelSpec(grid_file=grid_file, title=title, mode=mode)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metalink-figures",
        description="Render metalink CSV grid exports as figure panels.",
    )
    parser.add_argument("panels", nargs="+", metavar="file.csv[:title[:mode]]")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--no-raw", action="store_true",
                        help="skip the per-panel one-pixel-per-cell rasters")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = FigureJob(
            panels=tuple(parse_panel(p) for p in args.panels),
            output=args.out,
            raw_rasters=not args.no_raw,
            dpi=args.dpi,
        )
        written = render(job)
    except (ValueError, OSError, GridParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
