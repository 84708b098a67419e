"""Command-line entry point: fig-render <kind> --in CSV[,CSV] --out IMG."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, RenderError, render

EXIT_OK = 0
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fig-render",
        description="Render a scatter figure from simulation CSV outputs.")
    parser.add_argument("kind", choices=KINDS,
                        help="which figure to build")
    parser.add_argument("--in", dest="inputs", required=True,
                        metavar="CSV[,CSV]",
                        help="input CSV path(s), comma separated; "
                             "rank_bias_vs_degree takes replications,geometry")
    parser.add_argument("--out", required=True, metavar="IMG",
                        help="output image path (.png, .svg, or .pdf)")
    parser.add_argument("--metric", default="abs_dP_bar",
                        help="suite column for irregularity_scatter "
                             "(default: %(default)s)")
    parser.add_argument("--tau-true", type=float, default=0.1,
                        help="reference line for tau_vs_M "
                             "(default: %(default)s)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    in_paths = [p for p in args.inputs.split(",") if p]
    try:
        n_points = render(args.kind, in_paths, args.out,
                          metric=args.metric, tau_true=args.tau_true)
    except RenderError as exc:
        print(f"fig-render: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"wrote {args.out} ({n_points} points)")
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
