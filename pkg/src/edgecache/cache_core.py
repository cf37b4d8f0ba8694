"""Cache states, update actions and the delivery subproblem.

``CacheState.x[n, j]`` is True when content ``n`` sits in the cache of
SCBS ``j + 1`` (columns are 0-based, ids are 1-based). Actions are sets of
``(n, j)`` pairs in the same column convention.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import InfeasibleAction, InstanceTooLarge, MultiCopyState
from .topology import CostMatrix


@dataclass(frozen=True)
class CacheState:
    x: np.ndarray
    capacities: np.ndarray
    sizes: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=bool)
        caps = np.asarray(self.capacities, dtype=np.int64)
        sizes = np.ones(x.shape[0], dtype=np.int64) if self.sizes is None else np.asarray(self.sizes, dtype=np.int64)
        if x.ndim != 2 or caps.shape != (x.shape[1],) or sizes.shape != (x.shape[0],):
            raise ValueError(f"shape mismatch: x{x.shape}, capacities{caps.shape}, sizes{sizes.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "sizes", sizes)
        over = self.load() > caps
        if over.any():
            raise InfeasibleAction(f"capacity exceeded at SCBS columns {np.flatnonzero(over).tolist()}")

    @classmethod
    def empty(cls, N: int, capacities, sizes=None) -> "CacheState":
        caps = np.asarray(capacities, dtype=np.int64)
        return cls(np.zeros((N, len(caps)), dtype=bool), caps, sizes)

    @property
    def N(self) -> int:
        return self.x.shape[0]

    @property
    def M(self) -> int:
        return self.x.shape[1]

    def load(self) -> np.ndarray:
        return self.sizes @ self.x

    def copies(self) -> np.ndarray:
        return self.x.sum(axis=1)

    def is_single_copy(self) -> bool:
        return bool(np.all(self.copies() <= 1))

    def cached_pairs(self) -> set[tuple[int, int]]:
        return {(int(n), int(j)) for n, j in zip(*np.nonzero(self.x))}

    def with_x(self, x) -> "CacheState":
        return CacheState(x, self.capacities, self.sizes)

    def key(self) -> bytes:
        return np.packbits(self.x).tobytes()

    def __eq__(self, other):
        if not isinstance(other, CacheState):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.capacities, other.capacities)
                and np.array_equal(self.sizes, other.sizes))

    def __hash__(self):
        return hash((self.key(), self.x.shape))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["content_id", "scbs_id"])
        for n, j in sorted(self.cached_pairs()):
            w.writerow([n, j + 1])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, N: int, capacities, sizes=None) -> "CacheState":
        caps = np.asarray(capacities)
        x = np.zeros((N, len(caps)), dtype=bool)
        for row in csv.DictReader(io.StringIO(text)):
            x[int(row["content_id"]), int(row["scbs_id"]) - 1] = True
        return cls(x, caps, sizes)


@dataclass(frozen=True)
class CacheAction:
    adds: frozenset = field(default_factory=frozenset)
    evicts: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        adds = frozenset((int(n), int(m)) for n, m in self.adds)
        evicts = frozenset((int(n), int(m)) for n, m in self.evicts)
        if adds & evicts:
            raise InfeasibleAction(f"pairs both added and evicted: {sorted(adds & evicts)}")
        object.__setattr__(self, "adds", adds)
        object.__setattr__(self, "evicts", evicts)

    @property
    def size(self) -> int:
        return len(self.adds) + len(self.evicts)

    def reversed(self) -> "CacheAction":
        return CacheAction(self.evicts, self.adds)

    def __bool__(self):
        return self.size > 0


def diff_action(before: CacheState, after: CacheState) -> CacheAction:
    """The unique action that turns ``before`` into ``after``."""
    adds = zip(*np.nonzero(after.x & ~before.x))
    evicts = zip(*np.nonzero(before.x & ~after.x))
    return CacheAction(frozenset(adds), frozenset(evicts))


def is_feasible(state: CacheState, action: CacheAction) -> bool:
    N, M = state.x.shape
    for n, m in itertools.chain(action.adds, action.evicts):
        if not (0 <= n < N and 0 <= m < M):
            return False
    if any(state.x[n, m] for n, m in action.adds):
        return False
    if not all(state.x[n, m] for n, m in action.evicts):
        return False
    load = state.load().copy()
    for n, m in action.adds:
        load[m] += state.sizes[n]
    for n, m in action.evicts:
        load[m] -= state.sizes[n]
    return bool(np.all(load <= state.capacities))


def apply_action(state: CacheState, action: CacheAction) -> CacheState:
    if not is_feasible(state, action):
        raise InfeasibleAction("action violates the feasible set for this state")
    x = state.x.copy()
    for n, m in action.adds:
        x[n, m] = True
    for n, m in action.evicts:
        x[n, m] = False
    return state.with_x(x)


def update_penalty(action: CacheAction, gamma) -> float:
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return gamma * action.size


def content_costs(x: np.ndarray, costs: CostMatrix) -> np.ndarray:
    """Per-content unweighted delivery cost sum_u min(c_0^u, min_{m cached} c_m^u)."""
    x = np.asarray(x, dtype=bool)
    c0 = costs.mcbs
    if not x.any():
        return np.full(x.shape[0], c0.sum())
    sc = costs.scbs  # (M, U)
    best = np.broadcast_to(c0, (x.shape[0], c0.shape[0])).copy()
    for j in np.flatnonzero(x.any(axis=0)):
        rows = x[:, j]
        best[rows] = np.minimum(best[rows], sc[j][None, :])
    return best.sum(axis=1)


def subset_costs(costs: CostMatrix) -> np.ndarray:
    """f(S) for every SCBS bitmask S (bit j = column j), length 2^M."""
    M = costs.M
    c0 = costs.mcbs
    best = np.empty((1 << M, costs.U), dtype=costs.c.dtype)
    best[0] = c0
    for mask in range(1, 1 << M):
        low = mask & -mask
        j = low.bit_length() - 1
        best[mask] = np.minimum(best[mask ^ low], costs.scbs[j])
    return best.sum(axis=1)


def serving_cost(state: CacheState | np.ndarray, weights, costs: CostMatrix):
    """Exact optimum of the delivery subproblem: every (content, user) request
    picks its cheapest admissible source independently."""
    x = state.x if isinstance(state, CacheState) else np.asarray(state, dtype=bool)
    w = np.asarray(weights)
    if np.any(w < 0):
        raise ValueError("demand weights must be nonnegative")
    return (w * content_costs(x, costs)).sum()


def serving_cost_bruteforce(state: CacheState | np.ndarray, weights, costs: CostMatrix,
                            limit: int = 10**6):
    """Enumerates every delivery assignment y per content and keeps the best.

    Test oracle only; exponential in the number of users.
    """
    x = state.x if isinstance(state, CacheState) else np.asarray(state, dtype=bool)
    N, M = x.shape
    U = costs.U
    total = 0
    for n in range(N):
        sources = [0] + [j + 1 for j in range(M) if x[n, j]]
        if len(sources) ** U > limit:
            raise InstanceTooLarge(f"{len(sources)}^{U} assignments for content {n}")
        best = None
        for assign in itertools.product(sources, repeat=U):
            # assign[u] is the single source with y = 1 for user u
            val = sum(weights[n] * costs.c[src, u] for u, src in enumerate(assign))
            if best is None or val < best:
                best = val
        total += best
    return total


def single_copy_cost(state: CacheState | np.ndarray, weights, costs: CostMatrix):
    """Closed-form delivery cost, valid only when no content has two copies."""
    x = state.x if isinstance(state, CacheState) else np.asarray(state, dtype=bool)
    if np.any(x.sum(axis=1) > 1):
        raise MultiCopyState("closed-form cost requires at most one copy per content")
    c0 = costs.mcbs.sum()
    per = c0 * (1 - x.sum(axis=1)) + x.astype(costs.c.dtype) @ costs.scbs.sum(axis=1)
    return (np.asarray(weights) * per).sum()


def stage_objective(prev: CacheState, new: CacheState, weights, costs: CostMatrix, gamma):
    """Update penalty plus delivery cost of ``new``."""
    changes = int((prev.x != new.x).sum())
    return gamma * changes + serving_cost(new, weights, costs)


def count_states(N: int, M: int, b: int) -> int:
    return sum(comb(N, l) for l in range(b + 1)) ** M


def hit_counts(x: np.ndarray, demand, costs: CostMatrix, homes: np.ndarray):
    """(requests, any-SCBS hits, home-SCBS hits) with every user issuing ``demand[n]``.

    ``homes[u]`` is the 0-based home column of user column u.
    """
    demand = np.asarray(demand)
    U = costs.U
    requests = demand.sum() * U
    hits = demand[x.any(axis=1)].sum() * U
    local = (demand[:, None] * x[:, homes]).sum()
    return requests, hits, local
