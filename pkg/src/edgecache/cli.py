"""Command line entry point: ``edgecache run`` and ``edgecache scenarios``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import InstanceTooLarge, InvalidParameter, ScenarioParseError, ValidationError
from .harness import PRESETS, load_scenario, run_experiment
from .policies import parse_policies

EXIT_OK, EXIT_INVALID, EXIT_TOO_LARGE = 0, 2, 3
DEFAULT_POLICIES = "rh1,rh2,rh3,myopic,onestep,lru-s,lru-m,lb,offline"
_MODES = {"exact": "exact", "flow": "single_copy_flow", "greedy": "greedy"}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edgecache", description="Collaborative edge caching simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run Monte-Carlo replications of a scenario")
    run.add_argument("--scenario", required=True, help="preset name (ins1.1 .. ins7.4) or JSON file")
    run.add_argument("--policies", default=None,
                     help=f"comma separated policy names (default: scenario file or {DEFAULT_POLICIES})")
    run.add_argument("--reps", type=int, default=None, help="number of replications")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="CSV output path (stdout if omitted)")
    run.add_argument("--json", default=None, help="optional JSON output path")
    run.add_argument("--solver", choices=sorted(_MODES), default=None,
                     help="stage solver for forecasting policies")
    run.add_argument("--workers", type=int, default=1)
    sub.add_parser("scenarios", help="list the built-in scenarios")
    return ap


def _list_scenarios(out) -> int:
    print("name      grid  N0    arrivals  b   ratio  solver", file=out)
    for name, s in PRESETS.items():
        print(f"{name:<9} {s.rows}x{s.cols}   {s.n0:<5} {s.arrivals_per_stage:<9} {s.capacity:<3} "
              f"{s.ratio():<6.2f} {s.solver_mode}", file=out)
    return EXIT_OK


def _run(args) -> int:
    spec = load_scenario(args.scenario)
    if args.solver:
        spec = replace(spec, solver_mode=_MODES[args.solver])
    if args.reps is not None:
        spec = replace(spec, replications=args.reps)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.policies:
        policies = parse_policies(args.policies, args.solver)
    elif spec.policies:
        policies = list(spec.policies)
    else:
        policies = parse_policies(DEFAULT_POLICIES, args.solver)
    if not policies:
        raise ValidationError("no policies given")
    report = run_experiment(spec, policies, workers=args.workers)
    if args.out:
        report.write(csv_path=args.out)
    else:
        sys.stdout.write(report.to_csv())
    if args.json:
        report.write(json_path=args.json)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "scenarios":
            return _list_scenarios(sys.stdout)
        return _run(args)
    except (ValidationError, ScenarioParseError, InvalidParameter) as e:
        print(f"edgecache: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except InstanceTooLarge as e:
        print(f"edgecache: instance too large: {e}", file=sys.stderr)
        return EXIT_TOO_LARGE


if __name__ == "__main__":
    sys.exit(main())
