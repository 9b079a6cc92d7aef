"""Command line entry: `plots <figure-kind> --in <csv> --out <img>`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .figures import KINDS, METRICS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from votemetrics CSV outputs.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input", required=True,
                        help="input CSV (sweep, experiment, or bootstrap)")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path (.png)")
    parser.add_argument("--facets", default="",
                        help="comma-separated facet columns (e.g. m,seats; "
                             "'year' is derived from election_id)")
    parser.add_argument("--metrics", default=",".join(METRICS))
    parser.add_argument("--ymin", type=float, default=0.4)
    parser.add_argument("--ymax", type=float, default=1.0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input=Path(args.input),
        output=Path(args.output),
        facets=tuple(f.strip() for f in args.facets.split(",") if f.strip()),
        y_range=(args.ymin, args.ymax),
        metrics=tuple(m.strip() for m in args.metrics.split(",") if m.strip()),
    )
    try:
        render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
