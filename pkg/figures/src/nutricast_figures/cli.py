"""Batch figure rendering: nutricast-figures --input T.csv --kind K --out F.png"""

import argparse
import sys

from .render import KINDS, MissingColumns, PlotSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nutricast-figures",
        description="Render nutricast output tables (grids, predictions) to PNG.",
    )
    parser.add_argument(
        "--input", nargs="+", required=True,
        help="input table path(s); diff_map accepts ref/mean/diff grids",
    )
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--variable", help="label override for the color bar / axis")
    parser.add_argument("--vmin", type=float)
    parser.add_argument("--vmax", type=float)
    parser.add_argument(
        "--value-column", default="value", help="table column to color by (grids)"
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        inputs=tuple(args.input),
        kind=args.kind,
        out=args.out,
        variable=args.variable,
        vmin=args.vmin,
        vmax=args.vmax,
        value_column=args.value_column,
    )
    try:
        out = render(spec)
    except (MissingColumns, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
