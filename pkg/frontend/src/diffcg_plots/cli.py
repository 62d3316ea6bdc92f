"""plot_msd: turn a learning-curve CSV into a figure.

Usage: plot_msd <input.csv> <output.png> [--title T] [--ylim lo,hi]

Exit status 0 on success, 2 for bad arguments or malformed input, 3 for
unexpected failures.
"""

from __future__ import annotations

import argparse
import sys

from .render import CsvError, PlotSpec, render_curves

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3


def _parse_ylim(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"--ylim expects lo,hi, got {text!r}")
    return float(parts[0]), float(parts[1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_msd", description="Render MSD learning curves from a diffcg CSV."
    )
    parser.add_argument("input", help="learning-curve CSV (iter,<labels> header)")
    parser.add_argument("output", help="figure path (.png or .svg)")
    parser.add_argument("--title", default=None, help="figure title")
    parser.add_argument("--ylim", default=None, metavar="LO,HI", help="y-axis range in dB")

    # join `--ylim -60,5` so argparse does not read the value as a flag
    argv = list(sys.argv[1:] if argv is None else argv)
    for i, token in enumerate(argv[:-1]):
        if token == "--ylim":
            argv[i : i + 2] = [f"--ylim={argv[i + 1]}"]
            break
    args = parser.parse_args(argv)

    try:
        ylim = _parse_ylim(args.ylim) if args.ylim is not None else None
        spec = PlotSpec(args.input, args.output, title=args.title, ylim=ylim)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        labels = render_curves(spec)
    except CsvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - shell boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(f"wrote {args.output} ({len(labels)} curves)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
