"""Min-cost flow by successive shortest augmenting paths with node potentials."""

from __future__ import annotations

import heapq
from collections import deque

from ..errors import InfeasibleFlow


class FlowNetwork:
    """Directed network with integral capacities.

    Arcs are stored pairwise in a residual representation: arc ``2k`` is
    the k-th added arc and ``2k + 1`` its reverse.
    """

    def __init__(self, n_nodes: int, source: int, sink: int):
        self.n = n_nodes
        self.source = source
        self.sink = sink
        self.head: list[int] = []
        self.cap: list[int] = []
        self.cost: list = []
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self._tail: list[int] = []

    def add_arc(self, u: int, v: int, capacity: int, cost) -> int:
        if capacity < 0:
            raise ValueError("arc capacity must be nonnegative")
        k = len(self._tail)
        self._tail.append(u)
        self.head += [v, u]
        self.cap += [capacity, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(2 * k)
        self.adj[v].append(2 * k + 1)
        return k

    @property
    def n_arcs(self) -> int:
        return len(self._tail)

    def arc(self, k: int):
        """(tail, head, capacity, cost) of the k-th arc as added."""
        return self._tail[k], self.head[2 * k], self.cap[2 * k] + self.cap[2 * k + 1], self.cost[2 * k]


def _bellman_ford(net: FlowNetwork, cap: list[int]) -> list:
    # SPFA from the source over arcs with residual capacity
    inf = float("inf")
    dist = [inf] * net.n
    dist[net.source] = 0
    queue = deque([net.source])
    inq = [False] * net.n
    inq[net.source] = True
    relax = 0
    limit = net.n * max(1, len(cap))
    while queue:
        u = queue.popleft()
        inq[u] = False
        du = dist[u]
        for e in net.adj[u]:
            if cap[e] > 0:
                v = net.head[e]
                nd = du + net.cost[e]
                if nd < dist[v]:
                    dist[v] = nd
                    relax += 1
                    if relax > limit:
                        raise ValueError("negative-cost cycle in flow network")
                    if not inq[v]:
                        inq[v] = True
                        queue.append(v)
    return [d if d < inf else 0 for d in dist]


def min_cost_flow(net: FlowNetwork, flow_value: int):
    """Send ``flow_value`` units from source to sink at minimum cost.

    Returns ``(flows, total_cost)`` where ``flows[k]`` is the flow on the
    k-th added arc. Raises InfeasibleFlow when the max flow is smaller.
    """
    cap = list(net.cap)
    head, cost, adj = net.head, net.cost, net.adj
    pot = _bellman_ford(net, cap)
    inf = float("inf")
    sent = 0
    total = 0
    s, t = net.source, net.sink
    while sent < flow_value:
        dist = [inf] * net.n
        prev = [-1] * net.n
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            pu = pot[u]
            for e in adj[u]:
                if cap[e] > 0:
                    v = head[e]
                    nd = d + cost[e] + pu - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev[v] = e
                        heapq.heappush(heap, (nd, v))
        if dist[t] == inf:
            raise InfeasibleFlow(f"max flow {sent} < requested {flow_value}")
        for v in range(net.n):
            if dist[v] < inf:
                pot[v] += dist[v]
        push = flow_value - sent
        v = t
        while v != s:
            e = prev[v]
            push = min(push, cap[e])
            v = head[e ^ 1]
        v = t
        while v != s:
            e = prev[v]
            cap[e] -= push
            cap[e ^ 1] += push
            total += push * cost[e]
            v = head[e ^ 1]
        sent += push
    flows = [cap[2 * k + 1] - net.cap[2 * k + 1] for k in range(net.n_arcs)]
    return flows, total
