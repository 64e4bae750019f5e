"""Command line front end: ``roam simulate | metrics | field | validate``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import handlers
from .errors import ScenarioInvalid

EXIT_INVALID = 2
EXIT_MISSING = 3


def _grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected NX,NY with two positive integers") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid counts must be positive")
    return nx, ny


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roam", description="Reactive obstacle avoidance simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a scenario and write the run directory")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel processes (results do not change)")

    p = sub.add_parser("metrics", help="recompute metrics of a run directory")
    p.add_argument("run_dir")

    p = sub.add_parser("field", help="sample the avoidance field on a planar grid")
    p.add_argument("scenario")
    p.add_argument("--grid", type=_grid, required=True, metavar="NX,NY")
    p.add_argument("--out", required=True, help="CSV file to write")
    p.add_argument("--lower", type=_floats, help="grid lower corner (defaults to the workspace)")
    p.add_argument("--upper", type=_floats, help="grid upper corner")
    p.add_argument("--time", type=float, default=0.0)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            doc = handlers.simulate(args.scenario, args.out, workers=args.workers)
            counts = doc["outcomes"]["counts"]
            print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
            print(handlers.to_json(doc["metrics"]))
        elif args.command == "metrics":
            print(handlers.to_json(handlers.metrics(args.run_dir)))
        elif args.command == "field":
            doc = handlers.field(args.scenario, args.grid, args.lower, args.upper, args.time)
            n = handlers.write_field_csv(args.out, doc)
            print(f"wrote {n} rows to {args.out}")
        else:
            print(handlers.to_json(handlers.validate(args.scenario)))
    except ScenarioInvalid as exc:
        print("invalid scenario:", file=sys.stderr)
        for line in exc.violations:
            print(f"  {line}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"not found: {exc.filename}", file=sys.stderr)
        return EXIT_MISSING
    return 0


if __name__ == "__main__":
    sys.exit(main())
