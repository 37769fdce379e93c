"""Command-line renderer: plot --kind pd_curve --in pd_curve.csv --out fig.svg"""

import argparse
import sys

from .render import FigureSpec, render
from .schemas import BY_KIND, SchemaError


def _parser():
    parser = argparse.ArgumentParser(
        prog="plot", description="Render experiment CSVs into figures"
    )
    parser.add_argument("--kind", required=True, choices=sorted(BY_KIND))
    parser.add_argument("--in", dest="csv_path", required=True, help="input CSV")
    parser.add_argument(
        "--targets", default=None, help="image_targets.csv sidecar for stat_image overlays"
    )
    parser.add_argument("--out", required=True, help="output image path (SVG)")
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        csv_path=args.csv_path,
        out_path=args.out,
        targets_csv=args.targets,
        title=args.title,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
