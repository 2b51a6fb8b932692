"""Command-line front end.

Verbs:

* ``metalink run <config> --out <dir>``      execute and export a scenario
* ``metalink validate <config>``             static diagnostics only
* ``metalink oracle-diff <config>``          closed-form residuals only

``<config>`` is a path or the name of a bundled scenario
(fig8, fig9, fig10, fig11).  Exit codes: 0 success, 2 an [expect]
tolerance was violated, 3 configuration or validation failure.
"""

from __future__ import annotations

import argparse
import sys

from . import scenario
from .errors import MetalinkError
from .scenario import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metalink",
        description="Metasurface link simulator: run and check scenario files.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario and export its stages")
    p_run.add_argument("config", help="scenario file or bundled name")
    p_run.add_argument("--out", required=True, help="output directory")

    p_val = sub.add_parser("validate", help="check a scenario without running it")
    p_val.add_argument("config", help="scenario file or bundled name")

    p_od = sub.add_parser(
        "oracle-diff", help="run a scenario and report closed-form residuals"
    )
    p_od.add_argument("config", help="scenario file or bundled name")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = scenario.load_config(args.config)
    except MetalinkError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.verb == "validate":
        diags = scenario.validate(config)
        for d in diags:
            print(f"error{d}", file=sys.stderr)
        if diags:
            return EXIT_CONFIG
        print(f"ok: {args.config} ({config.topology})")
        return EXIT_OK

    try:
        diags = scenario.validate(config)
        if diags:
            for d in diags:
                print(f"error{d}", file=sys.stderr)
            return EXIT_CONFIG
        summary = scenario.run(
            config, out_dir=args.out if args.verb == "run" else None
        )
    except MetalinkError as exc:
        print(f"error[run]: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.verb == "oracle-diff":
        keys = [k for k in sorted(summary.values) if k.startswith("oracle.l2rel.")]
        if not keys:
            print("no closed-form reference exists for this scenario")
        for key in keys:
            print(f"{key} = {summary.values[key]:.6g}")
        return EXIT_OK

    for key in sorted(summary.values):
        v = summary.values[key]
        print(f"{key} = {v:.6g}" if isinstance(v, float) else f"{key} = {v}")
    if summary.violations:
        for msg in summary.violations:
            print(f"tolerance: {msg}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
