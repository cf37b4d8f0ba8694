"""Usage-cost and hit-ratio tables over the Ins presets.

    python scripts/run_presets.py --groups 1 2 --reps 100 --out results/

Writes one CSV per scenario plus a combined summary printed as a table.
"""

import argparse
import time
from pathlib import Path

from edgecache.harness import preset, run_experiment
from edgecache.policies import parse_policies

POLICIES = "lru-s,lru-m,myopic,onestep,rh1,rh2,rh3"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--groups", type=int, nargs="+", default=[1])
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--policies", default=POLICIES)
    ap.add_argument("--solver", default=None, choices=["exact", "flow", "greedy"])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    pols = parse_policies(args.policies, args.solver)
    names = [p.name for p in pols]
    print(f"{'scenario':<9}{'LB':>10}" + "".join(f"{n:>10}" for n in names) + f"{'x0':>10}   (proportional cost)")
    hits = []
    for g in args.groups:
        for k in range(1, 5):
            spec = preset(f"ins{g}.{k}")
            t0 = time.perf_counter()
            rep = run_experiment(spec, pols, replications=args.reps, seed=args.seed, workers=args.workers)
            pc = {r.policy: r.proportional_cost for r in rep.rows}
            print(f"{spec.name:<9}{rep.row('lb').mean_cost:>10.0f}" + "".join(f"{pc[n]:>10.3f}" for n in names)
                  + f"{rep.row('offline').mean_cost:>10.0f}   {time.perf_counter() - t0:.0f}s")
            hits.append((spec.name, {r.policy: (r.hit_ratio, r.local_hit_ratio) for r in rep.rows}))
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                rep.write(args.out / f"{spec.name}.csv", args.out / f"{spec.name}.json")
    print("\nhit ratio, any SCBS / home SCBS")
    for name, h in hits:
        print(f"{name:<9}" + "".join(f"{h[n][0]:>7.3f}/{h[n][1]:.3f}" for n in names + ["lb"]))


if __name__ == "__main__":
    main()
