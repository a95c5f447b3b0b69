"""Command-line entry point: ``figplots render --spec figure.json``."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import FigureSpec, SpecError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figplots",
                                     description="render csfg sweep CSVs into figures")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render one figure spec")
    render_p.add_argument("--spec", required=True, help="path to the figure spec JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec.from_file(args.spec)
        out = render(spec)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
