"""figgen command line: benchmark CSV in, figure panels out.

Exit codes: 0 success, 2 bad input (schema, filter, arguments).
"""

import argparse
import sys

from figgen.data import NoDataError, SchemaError
from figgen.figures import FigureSpec, render


def _parse_filters(pairs):
    filters = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise SchemaError(f"filter {pair!r} is not key=value")
        filters[key] = value
    return filters


def build_parser():
    parser = argparse.ArgumentParser(prog="figgen", description=__doc__)
    parser.add_argument("--csv", required=True, help="benchmark CSV path")
    parser.add_argument("--kind", required=True, choices=["gamma", "refine"])
    parser.add_argument(
        "--filter",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="keep only matching rows; repeatable",
    )
    parser.add_argument("--out-dir", default=".", help="directory for images")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(args.csv, args.kind, _parse_filters(args.filter))
        paths = render(spec, args.out_dir)
    except (SchemaError, NoDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
