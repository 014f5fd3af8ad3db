"""Command-line figure rendering from run result files."""

import argparse
import sys

from .figures import FIGURE_KINDS, FigureRequest, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="guided-abc-plot",
        description="Render figures from guided-abc CSV outputs",
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="GLOB", help="input file glob (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--labels", default=None,
                        help="comma-separated series labels")
    parser.add_argument("--truth", default=None,
                        help="comma-separated true parameter values")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    labels = args.labels.split(",") if args.labels else []
    truth = [float(v) for v in args.truth.split(",")] if args.truth else None
    request = FigureRequest(kind=args.kind, inputs=args.inputs, out=args.out,
                            labels=labels, truth=truth)
    try:
        path = render(request)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
