"""Command line for rendering result CSVs.

Exit codes: 0 on success, 2 for bad inputs (schema violation, missing
file, unsupported format).
"""

import argparse
import sys

from . import __version__
from .render import PlotJob, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="Render simulator CSV results into figures.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "kind", choices=["io", "scanN", "scanZ"], help="which figure the CSVs hold"
    )
    parser.add_argument("csvs", nargs="+", metavar="CSV", help="input CSV file(s)")
    parser.add_argument(
        "-o", "--output", required=True, help="output image path (.png or .svg)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(inputs=tuple(args.csvs), kind=args.kind, output=args.output)
    try:
        path = render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0
