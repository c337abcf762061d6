"""Command line: ``iaeb simulate|sweep|summarize``.

Exit codes: 0 success, 1 usage or configuration error, 2 run failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import CONTROLLERS, ScenarioError, parse_scenario
from .sim import SimulationError, run
from .summary import summarize
from .sweep import DEFAULT_GRID, parse_grid, sweep

EXIT_OK, EXIT_USAGE, EXIT_RUN = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(default=None) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the verb."""
    p = argparse.ArgumentParser(add_help=False, argument_default=default)
    g = p.add_argument_group("overrides")
    g.add_argument("--seed", type=int, help="base random seed")
    g.add_argument("--out-dir", type=Path, help="output directory (default: ./out)")
    g.add_argument("--controller", choices=CONTROLLERS)
    g.add_argument("--mu-real", type=float, help="true road friction")
    g.add_argument("--mu-map", type=float, help="friction served by the active map")
    g.add_argument("--latency-ms", type=float, help="V2X latency")
    return p


def build_parser() -> argparse.ArgumentParser:
    # the verb-level copy must not reset values given before the verb
    parser = _Parser(prog="iaeb", description="Intersection AEB simulator", parents=[_common()])
    common = _common(argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    p = sub.add_parser("simulate", parents=[common], help="run one scenario and write its trace")
    p.add_argument("scenario", type=Path)
    p.add_argument("--no-trace", action="store_true", help="skip the per-tick trace file")
    p = sub.add_parser("sweep", parents=[common], help="run an ego x target speed grid")
    p.add_argument("scenario", type=Path)
    p.add_argument("--grid", default=DEFAULT_GRID, help="km/h as start:stop:step or a comma list")
    p.add_argument("--target-grid", help="separate target grid (default: same as --grid)")
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("summarize", parents=[common], help="metrics and plot series from a trace")
    p.add_argument("trace", type=Path)
    return parser


def _overrides(args) -> dict:
    pairs = {"seed": args.seed, "controller": args.controller, "friction.mu_real": args.mu_real,
             "friction.mu_map": args.mu_map, "sensors.v2x.latency_ms": args.latency_ms}
    return {k: v for k, v in pairs.items() if v is not None}


def _load(args):
    sc = parse_scenario(args.scenario)
    changes = _overrides(args)
    return sc.with_updates(**changes) if changes else sc


def _emit(obj):
    print(json.dumps(obj, indent=2))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = args.out_dir or Path("out")
    try:
        if args.verb == "simulate":
            sc = _load(args)
            out_dir.mkdir(parents=True, exist_ok=True)
            trace = None if args.no_trace else out_dir / f"{args.scenario.stem}.jsonl"
            outcome = run(sc, trace)
            (out_dir / f"{args.scenario.stem}_outcome.json").write_text(
                json.dumps(outcome.to_json(), indent=2) + "\n")
            _emit(outcome.to_json())
            return EXIT_OK
        if args.verb == "sweep":
            sc = _load(args)
            try:
                egos = parse_grid(args.grid)
                targets = parse_grid(args.target_grid) if args.target_grid else egos
            except ValueError as err:
                parser.error(str(err))
            if args.workers < 1:
                parser.error("--workers must be >= 1")
            grid = sweep(sc, egos, targets, workers=args.workers, out_dir=out_dir)
            print(grid.matrix_csv(), end="")
            print(f"collided {len(grid.collided)}/{len(grid.cells)}; "
                  f"wrote {out_dir / 'matrix.csv'} and {out_dir / 'cells.csv'}", file=sys.stderr)
            for key in sorted(grid.failed):
                print(f"cell {key} failed: {grid.cells[key].error}", file=sys.stderr)
            return EXIT_RUN if grid.failed else EXIT_OK
        if args.verb == "summarize":
            if not args.trace.is_file():
                parser.error(f"trace not found: {args.trace}")
            s = summarize(args.trace, out_dir)
            _emit(s.to_json())
            if s.truncated:
                print("warning: trace is truncated; summary is partial", file=sys.stderr)
            return EXIT_OK
    except ScenarioError as err:
        print(f"iaeb: config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationError as err:
        print(f"iaeb: run failed: {err}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
