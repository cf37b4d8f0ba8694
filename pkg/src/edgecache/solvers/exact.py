"""Exact stage updates and one-shot placements.

The stage objective is separable per content once the capacity usage of
every SCBS is fixed: content n picks a set of SCBSs S_n and pays
``gamma * |S_n xor S_prev_n| + w_n * f(S_n)``. The exact solver runs a
dynamic program over contents whose state is the vector of used capacity,
so it is exact for multi-copy placements and arbitrary content sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..cache_core import CacheAction, CacheState, diff_action, serving_cost, subset_costs
from ..errors import InstanceTooLarge
from ..topology import CostMatrix
from .assignment import single_copy_target
from .problem import StageProblem

DEFAULT_MAX_WORK = 2 * 10**8


def popcount_table(M: int) -> np.ndarray:
    pc = np.zeros(1 << M, dtype=np.int64)
    for j in range(M):
        pc[1 << j:1 << (j + 1)] = pc[:1 << j] + 1
    return pc


def _option_masks(M: int, multi_copy: bool) -> np.ndarray:
    if multi_copy:
        return np.arange(1 << M, dtype=np.int64)
    return np.array([0] + [1 << j for j in range(M)], dtype=np.int64)


def _row_masks(x: np.ndarray) -> np.ndarray:
    return (x.astype(np.int64) << np.arange(x.shape[1], dtype=np.int64)).sum(axis=1)


def _predecessors(dims: tuple[int, ...], masks: np.ndarray, size: int) -> np.ndarray:
    """pred[s, o] = flat state before placing a size-``size`` item with option o,
    or S (a sentinel) when the option does not fit."""
    S = math.prod(dims)
    idx = np.indices(dims).reshape(len(dims), S).T  # (S, M) used capacity per state
    strides = np.array([math.prod(dims[j + 1:]) for j in range(len(dims))], dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(len(dims))) & 1).astype(np.int64)  # (O, M)
    before = idx[:, None, :] - size * bits[None, :, :]
    ok = np.all(before >= 0, axis=2)
    flat = (before * strides).sum(axis=2)
    return np.where(ok, flat, S)


def dp_work(n_items: int, dims, n_options: int) -> int:
    return n_items * math.prod(dims) * n_options


def exact_target(p: StageProblem, multi_copy: bool = True,
                 max_work: int = DEFAULT_MAX_WORK) -> CacheState:
    """Optimal successor state; ties go to fewer cache changes, then to the
    lowest-numbered option per content."""
    prev = p.prev_state
    M = prev.M
    rel = np.flatnonzero(p.relevant())
    if len(rel) == 0:
        return prev
    sizes = prev.sizes[rel]
    dims = tuple(int(min(b, sizes.sum())) + 1 for b in prev.capacities)
    masks = _option_masks(M, multi_copy)
    work = dp_work(len(rel), dims, len(masks))
    if work > max_work:
        raise InstanceTooLarge(f"exact stage DP needs {work:.3g} steps > cap {max_work:.3g}")
    f = subset_costs(p.costs)[masks]
    pc = popcount_table(M)
    prev_masks = _row_masks(prev.x[rel])
    S = math.prod(dims)
    preds: dict[int, np.ndarray] = {}
    val = np.full(S + 1, np.inf)
    val[0] = 0.0
    chg = np.zeros(S + 1, dtype=np.int64)
    choices = []
    for i, n in enumerate(rel):
        v = int(sizes[i])
        if v not in preds:
            preds[v] = _predecessors(dims, masks, v)
        pred = preds[v]
        flips = pc[masks ^ prev_masks[i]]
        cost = p.gamma * flips + p.weights[n] * f
        cand = val[pred] + cost[None, :]
        best = cand.min(axis=1)
        cch = np.where(cand == best[:, None], chg[pred] + flips[None, :], np.iinfo(np.int64).max)
        choice = cch.argmin(axis=1)
        val[:S] = best
        chg[:S] = cch[np.arange(S), choice]
        choices.append(choice.astype(np.int32))
    order = np.lexsort((np.arange(S), chg[:S], val[:S]))
    s = int(order[0])
    x_new = prev.x.copy()
    for i in range(len(rel) - 1, -1, -1):
        o = int(choices[i][s])
        m = int(masks[o])
        x_new[rel[i]] = [(m >> j) & 1 for j in range(M)]
        s = int(preds[int(sizes[i])][s, o])
    return prev.with_x(x_new)


def solve_exact_update(p: StageProblem, multi_copy: bool = True,
                       max_work: int = DEFAULT_MAX_WORK) -> CacheAction:
    return diff_action(p.prev_state, exact_target(p, multi_copy, max_work))


def enumerate_states(N: int, capacities, sizes=None, multi_copy: bool = True, limit: int = 10**6):
    """Every feasible cache configuration as an (N, M) bool array (test oracle)."""
    caps = list(capacities)
    sizes = np.ones(N, dtype=np.int64) if sizes is None else np.asarray(sizes)
    per_scbs = []
    for b in caps:
        subsets = [s for r in range(N + 1) for s in itertools.combinations(range(N), r)
                   if sizes[list(s)].sum() <= b]
        per_scbs.append(subsets)
    total = math.prod([len(s) for s in per_scbs])
    if total > limit:
        raise InstanceTooLarge(f"{total} states exceed enumeration limit {limit}")
    for combo in itertools.product(*per_scbs):
        x = np.zeros((N, len(caps)), dtype=bool)
        for j, subset in enumerate(combo):
            x[list(subset), j] = True
        if not multi_copy and np.any(x.sum(axis=1) > 1):
            continue
        yield x


def bruteforce_target(p: StageProblem, multi_copy: bool = True) -> CacheState:
    """Exhaustive minimisation of the stage objective (test oracle)."""
    prev = p.prev_state
    best, best_key = None, None
    for x in enumerate_states(prev.N, prev.capacities, prev.sizes, multi_copy):
        cand = prev.with_x(x)
        key = (p.objective(cand), int((x != prev.x).sum()))
        if best is None or key < best_key:
            best, best_key = cand, key
    return best


@dataclass(frozen=True)
class Placement:
    state: CacheState
    exact: bool
    method: str


def greedy_augment(weights, costs: CostMatrix, capacities, sizes=None,
                   multi_copy: bool = True, start: CacheState | None = None) -> CacheState:
    """Repeatedly add the (content, SCBS) copy with the largest drop in
    delivery cost until nothing fits or nothing helps."""
    w = np.asarray(weights, dtype=float)
    N = len(w)
    state = CacheState.empty(N, capacities, sizes) if start is None else start
    x = state.x.copy()
    caps = state.capacities
    sizes = state.sizes
    load = state.load().astype(np.int64)
    sc = costs.scbs.astype(float)
    cur = np.broadcast_to(costs.mcbs.astype(float), (N, costs.U)).copy()
    for j in range(costs.M):
        rows = x[:, j]
        cur[rows] = np.minimum(cur[rows], sc[j])

    def row_gain(n):
        return w[n] * np.maximum(cur[n][None, :] - sc, 0.0).sum(axis=1)

    gain = w[:, None] * np.maximum(cur[:, None, :] - sc[None, :, :], 0.0).sum(axis=2)
    while True:
        fits = (load[None, :] + sizes[:, None]) <= caps[None, :]
        ok = fits & ~x
        if not multi_copy:
            ok &= ~x.any(axis=1)[:, None]
        masked = np.where(ok, gain, -np.inf)
        k = int(np.argmax(masked))
        n, j = divmod(k, costs.M)
        if not masked[n, j] > 0:
            break
        x[n, j] = True
        load[j] += sizes[n]
        cur[n] = np.minimum(cur[n], sc[j])
        gain[n] = row_gain(n)
    return state.with_x(x)


def solve_static_placement(weights, costs: CostMatrix, capacities, multi_copy: bool = True,
                           sizes=None, max_work: int = DEFAULT_MAX_WORK) -> Placement:
    """One-shot placement minimising weighted delivery cost from an empty cache."""
    w = np.asarray(weights)
    empty = CacheState.empty(len(w), capacities, sizes)
    if not np.any(w > 0) or not np.any(empty.capacities > 0):
        return Placement(empty, True, "trivial")
    p = StageProblem(empty, w, costs, 0)
    if not multi_copy and np.all(empty.sizes == 1):
        return Placement(single_copy_target(p), True, "flow")
    try:
        return Placement(exact_target(p, multi_copy, max_work), True, "dp")
    except InstanceTooLarge:
        return Placement(greedy_augment(w, costs, capacities, sizes, multi_copy), False, "greedy")


def placement_cost(placement: Placement | CacheState, weights, costs: CostMatrix):
    state = placement.state if isinstance(placement, Placement) else placement
    return serving_cost(state, weights, costs)
