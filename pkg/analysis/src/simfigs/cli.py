"""Command line: simfigs --kind KIND --in CSV [--in CSV ...] --out IMAGE."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .figures import FIGURE_KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="simfigs", description=__doc__)
    parser.add_argument("--kind", required=True, choices=sorted(FIGURE_KINDS))
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--label", dest="labels", action="append", default=[],
                        help="curve label (repeatable, matched to --in order)")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind, inputs=args.inputs, output=args.out,
        labels=args.labels, title=args.title,
    )
    try:
        out = render(spec)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
