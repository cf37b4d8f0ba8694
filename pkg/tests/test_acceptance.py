"""Acceptance criteria, one test per criterion.

Every test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""

import itertools
import time

import numpy as np
import pytest

from edgecache.cache_core import CacheState, count_states, serving_cost, serving_cost_bruteforce, single_copy_cost
from edgecache.harness import preset, run_experiment, run_replication
from edgecache.policies import parse_policies
from edgecache.solvers import StageProblem, backward_induction, enumerate_states, solve_single_copy_update
from edgecache.cache_core import apply_action
from edgecache.topology import build_grid, cost_matrix, costs_from_array

RESULTS: list[str] = []
GREEDY_DELTAS: list[float] = []
ALL_POLICIES = "rh1,rh2,rh3,myopic,onestep,lru-s,lru-m,greedy"


def record(num, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    return ok


def _costs(rng, M, U):
    sc = rng.integers(0, 10, size=(M, U))
    return costs_from_array(np.vstack([np.full((1, U), 20), sc]))


def test_c01_state_count():
    t0 = time.perf_counter()
    n = count_states(10, 2, 3)
    dt = time.perf_counter() - t0
    assert record(1, n == 30976 and dt < 1e-3, f"count_states(10, 2, 3) = {n} in {dt * 1e3:.3f} ms")


def test_c02_delivery_oracle():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        N, M, U = rng.integers(1, 5), rng.integers(1, 4), rng.integers(1, 4)
        costs = _costs(rng, M, U)
        x = rng.random((N, M)) < 0.5
        w = rng.integers(0, 4, size=N)
        bad += serving_cost(x, w, costs) != serving_cost_bruteforce(x, w, costs)
    dt = time.perf_counter() - t0
    assert record(2, bad == 0 and dt < 10, f"1000 instances, {bad} mismatches, {dt:.2f} s")


def _single_copy_bruteforce(p):
    """min over all single-copy successors of penalty + closed-form delivery cost."""
    prev = p.prev_state
    best = None
    for x in enumerate_states(prev.N, prev.capacities, multi_copy=False):
        val = p.gamma * int((x != prev.x).sum()) + single_copy_cost(x, p.weights, p.costs)
        best = val if best is None or val < best else best
    return best


def test_c03_single_copy_solver():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    bad = 0
    for i in range(500):
        N, M = rng.integers(1, 7), rng.integers(1, 3)
        caps = rng.integers(0, 3, size=M)
        x = np.zeros((N, M), dtype=bool)
        order = rng.permutation(N)
        k = 0
        for j in range(M):
            take = min(int(rng.integers(0, caps[j] + 1)), N - k)
            x[order[k:k + take], j] = True
            k += take
        p = StageProblem(CacheState(x, caps), rng.integers(0, 10, size=N), _costs(rng, M, int(rng.integers(1, 4))),
                         (0, 50, 100)[i % 3])
        new = apply_action(p.prev_state, solve_single_copy_update(p))
        bad += p.objective(new) != _single_copy_bruteforce(p)
    dt = time.perf_counter() - t0
    assert record(3, bad == 0 and dt < 30, f"500 instances, {bad} mismatches, {dt:.2f} s")


def test_c04_backward_induction_oracle():
    demand = np.array([[9, 4, 1, 0], [5, 6, 1, 2], [1, 3, 2, 8]])
    costs = cost_matrix(build_grid(1, 2))
    gamma = 5
    t0 = time.perf_counter()
    res = backward_induction(demand, costs, [1, 1], gamma)
    states = list(enumerate_states(4, [1, 1]))
    stage = [[serving_cost(x, demand[t], costs) for x in states] for t in range(3)]
    best = min(
        sum(stage[t][s] for t, s in enumerate(seq))
        + gamma * sum(int((states[a] != states[b]).sum()) for a, b in zip(seq, seq[1:]))
        for seq in itertools.product(range(len(states)), repeat=3)
    )
    dt = time.perf_counter() - t0
    assert record(4, res.V0 == best and dt < 60, f"V0 = {res.V0:g}, forward search = {best:g}, {dt:.2f} s")


def test_c05_closed_form_cost():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        N, M, U = rng.integers(1, 7), rng.integers(1, 4), rng.integers(1, 4)
        costs = _costs(rng, M, U)
        x = np.zeros((N, M), dtype=bool)
        where = rng.integers(-1, M, size=N)
        x[where >= 0, where[where >= 0]] = True
        w = rng.integers(0, 10, size=N)
        bad += single_copy_cost(x, w, costs) != serving_cost(x, w, costs)
    dt = time.perf_counter() - t0
    assert record(5, bad == 0 and dt < 5, f"1000 single-copy states, {bad} mismatches, {dt:.2f} s")


def test_c06_dominance():
    t0 = time.perf_counter()
    problems = []
    for name in ("ins1.1", "ins1.2", "ins1.3", "ins1.4"):
        rep = run_experiment(preset(name), parse_policies(ALL_POLICIES), replications=30, seed=6)
        GREEDY_DELTAS.extend(rep.deltas["greedy-rh1"])
        lb = rep.costs["lb"]
        if not rep.row("lb").exact:
            problems.append(f"{name}: LB not exact")
        for pol, c in rep.costs.items():
            if np.any(c < lb) or rep.row(pol).mean_cost < rep.row("lb").mean_cost:
                problems.append(f"{name}: {pol} below LB")
        if np.all(rep.costs["offline"] > lb):
            if rep.row("lb").proportional_cost != 0 or rep.row("offline").proportional_cost != 1:
                problems.append(f"{name}: anchors off")
    dt = time.perf_counter() - t0
    detail = "; ".join(problems) or "all policies >= LB, LB -> 0, x0 -> 1"
    assert record(6, not problems and dt < 120, f"ins1.1-1.4 x 30 reps: {detail}, {dt:.1f} s")


def test_c07_table_trend():
    t0 = time.perf_counter()
    margin = 0.05
    lines, ok = [], True
    for name in ("ins1.1", "ins1.2", "ins1.3"):
        rep = run_experiment(preset(name), parse_policies("rh1,myopic,lru-s,lru-m"), replications=100, seed=42)
        pc = {r.policy: r.proportional_cost for r in rep.rows}
        good = (pc["lru-s"] - pc["rh1"] >= margin and pc["lru-m"] - pc["rh1"] >= margin
                and pc["lru-m"] - pc["myopic"] >= margin)
        ok &= good
        lines.append(f"{name} rh1={pc['rh1']:.3f} myopic={pc['myopic']:.3f} "
                     f"lru-s={pc['lru-s']:.3f} lru-m={pc['lru-m']:.3f}")
    dt = time.perf_counter() - t0
    assert record(7, ok and dt < 300, f"{' | '.join(lines)}, {dt:.1f} s")


def test_c08_hit_ratio_divergence():
    t0 = time.perf_counter()
    rep = run_experiment(preset("ins1.3"), parse_policies("rh1,lru-m"), replications=100, seed=42)
    rh, lm = rep.row("rh1"), rep.row("lru-m")
    dt = time.perf_counter() - t0
    ok = lm.hit_ratio >= rh.hit_ratio and lm.mean_cost >= rh.mean_cost and dt < 120
    # diagnostic only: the home-SCBS reading of a hit
    RESULTS.append(f"       note: home-SCBS hit ratio lru-m={lm.local_hit_ratio:.3f} rh1={rh.local_hit_ratio:.3f}")
    assert record(8, ok, f"ins1.3 hit ratio lru-m={lm.hit_ratio:.3f} rh1={rh.hit_ratio:.3f}, "
                         f"mean cost lru-m={lm.mean_cost:.0f} rh1={rh.mean_cost:.0f}, {dt:.1f} s")


def test_c10_scale():
    worst, total = 0.0, 0.0
    for k in range(1, 5):
        spec = preset(f"ins7.{k}")
        rep = run_replication(spec, parse_policies("greedy"), seed=10 + k)
        run = rep.runs["greedy-rh1"]
        GREEDY_DELTAS.extend(run.deltas)
        worst = max(worst, float(run.decision_s.max()))
        total += float(run.decision_s.sum())
    assert record(10, worst <= 2.0, f"ins7.1-7.4 greedy, worst stage decision {worst * 1e3:.0f} ms "
                                     f"({total:.1f} s of decisions)")


def test_c09_greedy_safety():
    # runs last: collects every greedy replacement executed by criteria 6 and 10
    rep = run_experiment(preset("ins2.1"), parse_policies("greedy,greedy-rh3"), replications=5, seed=9)
    deltas = GREEDY_DELTAS + rep.deltas["greedy-rh1"] + rep.deltas["greedy-rh3"]
    bad = sum(d >= 0 for d in deltas)
    assert record(9, bad == 0 and len(deltas) > 0, f"{len(deltas)} replacements, {bad} with delta >= 0")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS))
