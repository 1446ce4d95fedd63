"""Command line entry point: plot --figure <id> --data <dir> --out <file.svg>."""

from __future__ import annotations

import argparse
import sys
import warnings

from .render import FIGURE_IDS, SchemaError, build_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a study-figure analogue from sqa-chain CSVs",
    )
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--data", required=True,
                        help="directory holding the figure's CSVs + manifest")
    parser.add_argument("--out", required=True, help="output image (.svg)")
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spec = build_spec(args.figure, args.data)
            render(spec, args.out)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
