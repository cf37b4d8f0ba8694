"""Per-stage decision time of the greedy replacement heuristic on Ins 7.

    python scripts/scale_check.py --reps 1
"""

import argparse

import numpy as np

from edgecache.harness import preset, run_replication
from edgecache.policies import parse_policies


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=1)
    ap.add_argument("--policies", default="greedy")
    ap.add_argument("--group", type=int, default=7)
    args = ap.parse_args()
    pols = parse_policies(args.policies)
    for k in range(1, 5):
        spec = preset(f"ins{args.group}.{k}")
        for rep in range(args.reps):
            res = run_replication(spec, pols, seed=rep)
            for p in pols:
                run = res.runs[p.name]
                dt = run.decision_s * 1e3
                print(f"{spec.name} rep {rep} {p.name}: N={spec.catalog_trajectory()[-1]} "
                      f"max {dt.max():.0f} ms, median {np.median(dt):.0f} ms, "
                      f"{int(run.updates.sum())} updates, {len(run.deltas)} greedy swaps")


if __name__ == "__main__":
    main()
