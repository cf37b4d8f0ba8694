"""Exact single-copy cache update as a transportation problem."""

from __future__ import annotations

import numpy as np

from ..cache_core import CacheAction, CacheState, diff_action
from ..errors import MultiCopyState, NonUnitSize
from .flow import FlowNetwork, min_cost_flow
from .problem import StageProblem, integer_scale


def single_copy_target(p: StageProblem) -> CacheState:
    """Optimal successor state under the one-copy-per-content restriction.

    Each relevant content ships one unit either to an SCBS (capacity b_m)
    or to an "uncached" sink. Assigning n to m earns w_n * s_m and costs
    gamma per add/evict; a change counter rides in the low digits of every
    arc cost so ties resolve towards fewer cache changes.
    """
    prev = p.prev_state
    if np.any(prev.sizes != 1):
        raise NonUnitSize("the transportation formulation needs unit content sizes")
    if not prev.is_single_copy():
        raise MultiCopyState("previous state holds multiple copies of some content")
    rel = np.flatnonzero(p.relevant())
    R, M = len(rel), prev.M
    x_new = prev.x.copy()
    if R == 0:
        return prev
    scale = integer_scale(p.weights[rel], p.gamma, p.costs)
    K = 2 * R + 1
    s = p.costs.savings()
    gamma = p.gamma

    def arc_cost(value, changes):
        return int(round(value * scale)) * K + changes

    src, unc, sink = 0, R + M + 1, R + M + 2
    net = FlowNetwork(R + M + 3, src, sink)
    arcs = []
    for i, n in enumerate(rel):
        node = 1 + i
        net.add_arc(src, node, 1, 0)
        where = np.flatnonzero(prev.x[n])
        cached = len(where) > 0
        for j in range(M):
            if prev.capacities[j] < 1:
                continue
            if cached and where[0] == j:
                moves = 0
            else:
                moves = 2 if cached else 1
            k = net.add_arc(node, 1 + R + j, 1, arc_cost(-p.weights[n] * s[j] + gamma * moves, moves))
            arcs.append((k, n, j))
        k = net.add_arc(node, unc, 1, arc_cost(gamma if cached else 0, int(cached)))
        arcs.append((k, n, None))
    for j in range(M):
        net.add_arc(1 + R + j, sink, int(prev.capacities[j]), 0)
    net.add_arc(unc, sink, R, 0)
    flows, _ = min_cost_flow(net, R)
    x_new[rel] = False
    for k, n, j in arcs:
        if flows[k] and j is not None:
            x_new[n, j] = True
    return prev.with_x(x_new)


def solve_single_copy_update(p: StageProblem) -> CacheAction:
    return diff_action(p.prev_state, single_copy_target(p))


def single_copy_static(weights, costs, capacities) -> CacheState:
    """Best one-shot single-copy placement (empty start, no penalty)."""
    w = np.asarray(weights)
    empty = CacheState.empty(len(w), capacities)
    return single_copy_target(StageProblem(empty, w, costs, 0))
