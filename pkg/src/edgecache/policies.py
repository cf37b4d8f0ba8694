"""Cache-update policies: offline Zipf placement, LRU variants, Myopic,
One-step, rolling horizon, the greedy replacement heuristic and the
clairvoyant lower bound."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace

import numpy as np

from .cache_core import CacheAction, CacheState, diff_action, serving_cost
from .demand import ArModel, DemandTrace, forecast_path, zipf_popularity
from .errors import InvalidParameter
from .solvers import (
    DEFAULT_MAX_WORK,
    StageProblem,
    exact_target,
    single_copy_target,
    solve_static_placement,
)
from .topology import CostMatrix

SOLVER_MODES = ("exact", "single_copy_flow", "greedy")
LRU_DECAY = 0.5


class Kind(str, enum.Enum):
    OFFLINE = "Offline"
    LRU_SINGLE = "LruSingle"
    LRU_MULTI = "LruMulti"
    MYOPIC = "Myopic"
    ONE_STEP = "OneStep"
    ROLLING_HORIZON = "RollingHorizon"
    GREEDY_REPLACE = "GreedyReplace"
    CLAIRVOYANT_LB = "ClairvoyantLB"


FORECASTING = (Kind.MYOPIC, Kind.ONE_STEP, Kind.ROLLING_HORIZON, Kind.GREEDY_REPLACE)


@dataclass(frozen=True)
class PolicySpec:
    kind: Kind
    r: int | None = None  # None -> capacity default for the kind
    horizon: int = 0
    solver_mode: str | None = None  # None -> scenario default
    decay: float = LRU_DECAY
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.r is not None and self.r < 0:
            raise InvalidParameter("r must be >= 0")
        if self.horizon < 0:
            raise InvalidParameter("horizon must be >= 0")
        if self.solver_mode is not None and self.solver_mode not in SOLVER_MODES:
            raise InvalidParameter(f"unknown solver mode {self.solver_mode!r}")
        if not 0 <= self.decay <= 1:
            raise InvalidParameter("LRU decay must lie in [0, 1]")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        k = self.kind
        if k is Kind.ROLLING_HORIZON:
            return f"rh{self.horizon}"
        if k is Kind.GREEDY_REPLACE:
            return f"greedy-rh{self.horizon}"
        return {
            Kind.OFFLINE: "offline",
            Kind.LRU_SINGLE: "lru-s",
            Kind.LRU_MULTI: "lru-m",
            Kind.MYOPIC: "myopic",
            Kind.ONE_STEP: "onestep",
            Kind.CLAIRVOYANT_LB: "lb",
        }[k]

    def resolved_mode(self, default: str) -> str:
        if self.kind is Kind.GREEDY_REPLACE:
            return "greedy"
        if self.kind in FORECASTING:
            return self.solver_mode or default
        return "n/a"


_SOLVER_ALIASES = {"exact": "exact", "flow": "single_copy_flow", "single_copy_flow": "single_copy_flow",
                   "greedy": "greedy"}


def parse_policy(token: str, solver: str | None = None) -> PolicySpec:
    """Parse CLI names: rh<k>, myopic, onestep, lru-s, lru-m, lb, offline, greedy[-rh<k>]."""
    tok = token.strip().lower()
    mode = _SOLVER_ALIASES[solver] if solver else None
    fixed = {
        "offline": Kind.OFFLINE, "x0": Kind.OFFLINE,
        "lru-s": Kind.LRU_SINGLE, "lru-m": Kind.LRU_MULTI,
        "myopic": Kind.MYOPIC, "onestep": Kind.ONE_STEP, "one-step": Kind.ONE_STEP,
        "lb": Kind.CLAIRVOYANT_LB,
    }
    if tok in fixed:
        kind = fixed[tok]
        return PolicySpec(kind, solver_mode=mode if kind in FORECASTING else None)
    m = re.fullmatch(r"rh(\d+)", tok)
    if m:
        return PolicySpec(Kind.ROLLING_HORIZON, horizon=int(m.group(1)), solver_mode=mode)
    m = re.fullmatch(r"greedy(?:-rh(\d+))?", tok)
    if m:
        return PolicySpec(Kind.GREEDY_REPLACE, horizon=int(m.group(1) or 1))
    raise InvalidParameter(f"unknown policy {token!r}")


def parse_policies(text: str, solver: str | None = None) -> list[PolicySpec]:
    return [parse_policy(t, solver) for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------- weights

def myopic_weights(lam_t) -> np.ndarray:
    return np.asarray(lam_t, dtype=float)


def rolling_horizon_weights(lam_t, window, model: ArModel, t: int, horizon: int, T: int) -> np.ndarray:
    """Immediate demand plus AR forecasts for the next ``horizon`` stages,
    truncated at the end of the day (the value after stage T is zero)."""
    w = np.asarray(lam_t, dtype=float).copy()
    steps = min(horizon, T - t)
    if steps > 0:
        w += forecast_path(model, window, t, steps).sum(axis=0)
    return w


def empirical_zipf(avg_demand, active, skew: float) -> np.ndarray:
    """Zipf mass assigned by rank of observed average demand among active contents."""
    avg = np.asarray(avg_demand, dtype=float)
    idx = np.flatnonzero(active)
    p = np.zeros(len(avg))
    if len(idx) == 0:
        return p
    order = idx[np.lexsort((idx, -avg[idx]))]
    p[order] = zipf_popularity(len(idx), skew)
    return p


def one_step_weights(lam_t, p, t: int, T: int) -> np.ndarray:
    lam_t = np.asarray(lam_t, dtype=float)
    return lam_t + (T - t) * np.asarray(p) * lam_t.sum()


# ---------------------------------------------------------------- stage solvers

def greedy_replace(p: StageProblem, r: int, deltas: list | None = None) -> CacheAction:
    """Greedy replacement heuristic over contents in decreasing order of weight.

    Round i looks at the i-th most popular content, scores adding it to
    every SCBS k that lacks it (evicting the cached content j whose removal
    hurts least, or using a free slot) and carries out the single best
    replacement when its total cost change is negative. Copies elsewhere
    are taken into account, so multiple copies may arise.
    """
    return diff_action(p.prev_state, greedy_target(p, r, deltas))


def _removal_losses(x: np.ndarray, w: np.ndarray, sc: np.ndarray, c0: np.ndarray, rows=None) -> np.ndarray:
    """loss[n, k] = w_n * (f(S_n minus k) - f(S_n)) for cached (n, k), inf elsewhere."""
    rows = np.arange(x.shape[0]) if rows is None else np.asarray(rows)
    xs = x[rows]
    M, U = sc.shape
    src = np.where(xs[:, :, None], sc[None, :, :], np.inf)  # (R, M, U)
    full = np.concatenate([src, np.broadcast_to(c0, (len(rows), 1, U))], axis=1)
    two = np.partition(full, 1, axis=1)[:, :2, :]
    best, second = two[:, 0, :], two[:, 1, :]
    # removing k only matters for users whose unique best source is k
    # ties give second == best, so a duplicated best source costs nothing to drop
    loss = np.where(src == best[:, None, :], (second - best)[:, None, :], 0.0)
    loss = loss.sum(axis=2) * w[rows][:, None]
    return np.where(xs, loss, np.inf)


def greedy_target(p: StageProblem, r: int, deltas: list | None = None) -> CacheState:
    prev = p.prev_state
    x = prev.x.copy()
    w = np.asarray(p.weights, dtype=float)
    gamma = float(p.gamma)
    sc = p.costs.scbs.astype(float)
    c0 = p.costs.mcbs.astype(float)
    sizes, caps = prev.sizes, prev.capacities
    load = prev.load().astype(np.int64)
    E = gamma + _removal_losses(x, w, sc, c0)
    order = np.lexsort((np.arange(len(w)), -w))
    order = order[w[order] > 0][: max(0, r)]
    for i in order:
        cur = np.minimum(c0, np.where(x[i][:, None], sc, np.inf).min(axis=0))
        add = gamma + w[i] * (np.minimum(cur[None, :], sc).sum(axis=1) - cur.sum())  # (M,)
        need = load + sizes[i] - caps  # capacity to free per SCBS
        free = need <= 0
        Em = np.where(sizes[:, None] >= need[None, :], E, np.inf)
        j_best = Em.argmin(axis=0)
        evict = np.where(free, 0.0, Em[j_best, np.arange(len(caps))])
        total = np.where(x[i], np.inf, add + evict)
        k = int(np.argmin(total))
        if not total[k] < 0:
            continue
        if deltas is not None:
            deltas.append(float(total[k]))
        x[i, k] = True
        load[k] += sizes[i]
        touched = [i]
        if not free[k]:
            j = int(j_best[k])
            x[j, k] = False
            load[k] -= sizes[j]
            touched.append(j)
        E[touched] = gamma + _removal_losses(x, w, sc, c0, touched)
    return prev.with_x(x)


def solve_stage(p: StageProblem, mode: str, r: int | None = None, deltas: list | None = None,
                max_work: int = DEFAULT_MAX_WORK) -> CacheState:
    """Successor state of ``p`` under the chosen solver mode."""
    if mode == "exact":
        return exact_target(p, True, max_work)
    if mode == "single_copy_flow":
        return single_copy_target(p)
    if mode == "greedy":
        return greedy_target(p, int(p.capacities.sum()) if r is None else r, deltas)
    raise InvalidParameter(f"unknown solver mode {mode!r}")


def myopic_update(p: StageProblem, mode: str = "exact", **kw) -> CacheAction:
    """``p.weights`` must be the current-stage demand."""
    return diff_action(p.prev_state, solve_stage(p, mode, **kw))


def rolling_horizon_update(p: StageProblem, model: ArModel, window, t: int, horizon: int, T: int,
                           mode: str = "exact", **kw) -> CacheAction:
    """``p.weights`` is the current demand; look-ahead is added here."""
    w = rolling_horizon_weights(p.weights, window, model, t, horizon, T)
    q = replace(p, weights=w)
    return diff_action(p.prev_state, solve_stage(q, mode, **kw))


def one_step_update(p: StageProblem, zipf_p, t: int, T: int, mode: str = "exact", **kw) -> CacheAction:
    q = replace(p, weights=one_step_weights(p.weights, zipf_p, t, T))
    return diff_action(p.prev_state, solve_stage(q, mode, **kw))


def lru_update(state: CacheState, demand, scores, r: int, single_copy: bool) -> CacheAction:
    """Popularity-driven replacement per SCBS.

    Uncached contents are ranked by this stage's demand, cached ones by
    their recency score; a newcomer displaces the lowest-scored cached
    item only when its demand is strictly higher than that item's demand.
    Free slots are never filled, so the item count per SCBS never grows.
    """
    x = state.x.copy()
    demand = np.asarray(demand)
    scores = np.asarray(scores, dtype=float)
    sizes, caps = state.sizes, state.capacities
    N = state.N
    ids = np.arange(N)
    by_demand = ids[np.lexsort((ids, -demand))]
    by_demand = by_demand[demand[by_demand] > 0]
    for k in range(state.M):
        done = 0
        added = set()
        load = int(sizes @ x[:, k])
        for i in by_demand:
            if done >= r:
                break
            if x[i, k] or (single_copy and x[i].any()):
                continue
            # replacement only: a newcomer always displaces something
            need = load + sizes[i] - caps[k]
            cached = [j for j in np.flatnonzero(x[:, k]) if j not in added and sizes[j] >= need]
            if not cached:
                continue
            victim = min(cached, key=lambda j: (scores[j], demand[j], j))
            if not demand[i] > demand[victim]:
                break
            x[victim, k] = False
            x[i, k] = True
            load += sizes[i] - sizes[victim]
            added.add(int(i))
            done += 1
    return diff_action(state, state.with_x(x))


def clairvoyant_lower_bound(lam, costs: CostMatrix, capacities, sizes=None,
                            max_work: int = DEFAULT_MAX_WORK):
    """Per-stage optimal placement for the true demand with free updates.

    Returns ``(total_cost, stage_costs, states, exact)``.
    """
    lam = np.atleast_2d(lam)
    stage_costs, states, exact = [], [], True
    for t in range(lam.shape[0]):
        pl = solve_static_placement(lam[t], costs, capacities, True, sizes, max_work)
        exact &= pl.exact
        states.append(pl.state)
        stage_costs.append(serving_cost(pl.state, lam[t], costs))
    return sum(stage_costs), stage_costs, states, exact


# ---------------------------------------------------------------- stateful wrappers

@dataclass
class Context:
    """What a policy may see in one replication."""

    trace: DemandTrace
    model: ArModel
    costs: CostMatrix
    capacities: np.ndarray
    gamma: float
    default_mode: str = "exact"
    max_work: int = DEFAULT_MAX_WORK
    n_initial: int = 0  # contents whose Zipf rank (= id order) the offline phase knows
    offline_total: float | None = None  # expected total demand for the Zipf placement

    @property
    def T(self) -> int:
        return self.trace.T

    @property
    def N(self) -> int:
        return self.trace.N

    def demand(self, t: int) -> np.ndarray:
        return self.trace.at(t)

    def active(self, t: int) -> np.ndarray:
        return self.trace.catalog.birth <= t

    def window(self, t: int) -> np.ndarray:
        return self.trace.window(t, self.model.H)


class Policy:
    """Wraps a PolicySpec with the per-replication bookkeeping it needs."""

    def __init__(self, spec: PolicySpec, ctx: Context):
        self.spec = spec
        self.ctx = ctx
        self.mode = spec.resolved_mode(ctx.default_mode)
        self.exact = True
        self.deltas: list[float] = []
        self.scores = np.zeros(ctx.N)
        self.seen_sum = np.zeros(ctx.N)

    # -- helpers
    def _placement(self, weights, multi_copy: bool) -> CacheState:
        pl = solve_static_placement(weights, self.ctx.costs, self.ctx.capacities, multi_copy,
                                    self.ctx.trace.catalog.sizes, self.ctx.max_work)
        self.exact &= pl.exact
        return pl.state

    def _weights(self, t: int) -> np.ndarray:
        ctx, spec = self.ctx, self.spec
        lam = ctx.demand(t)
        if spec.kind is Kind.MYOPIC:
            return myopic_weights(lam)
        if spec.kind in (Kind.ROLLING_HORIZON, Kind.GREEDY_REPLACE):
            return rolling_horizon_weights(lam, ctx.window(t), ctx.model, t, spec.horizon, ctx.T)
        if spec.kind is Kind.ONE_STEP:
            active = ctx.active(t)
            first = np.maximum(ctx.trace.catalog.birth, 1)
            avg = np.where(active, self.seen_sum / np.maximum(t - first + 1, 1), 0.0)
            p = empirical_zipf(avg, active, ctx.model.zipf_skew)
            return one_step_weights(lam, p, t, ctx.T)
        raise AssertionError(spec.kind)

    def _observe(self, t: int):
        lam = self.ctx.demand(t)
        self.seen_sum += lam
        self.scores = self.spec.decay * self.scores + lam

    # -- protocol
    def initial(self) -> CacheState:
        ctx, kind = self.ctx, self.spec.kind
        self._observe(1)
        if kind in (Kind.OFFLINE, Kind.LRU_SINGLE, Kind.LRU_MULTI):
            # the offline phase only knows the Zipf ranking of the initial catalog
            k = ctx.n_initial
            total = ctx.offline_total if ctx.offline_total is not None else ctx.model.base_rate * k * ctx.T
            w = np.zeros(ctx.N)
            if k:
                w[:k] = zipf_popularity(k, ctx.model.zipf_skew) * total
            return self._placement(w, kind is not Kind.LRU_SINGLE)
        if kind is Kind.CLAIRVOYANT_LB:
            return self._placement(ctx.demand(1), True)
        return self._placement(self._weights(1), self.mode != "single_copy_flow")

    def step(self, t: int, state: CacheState) -> CacheState:
        ctx, spec = self.ctx, self.spec
        kind = spec.kind
        self._observe(t)
        if kind is Kind.OFFLINE:
            return state
        if kind is Kind.CLAIRVOYANT_LB:
            return self._placement(ctx.demand(t), True)
        if kind in (Kind.LRU_SINGLE, Kind.LRU_MULTI):
            r = int(state.capacities.max()) if spec.r is None else spec.r
            act = lru_update(state, ctx.demand(t), self.scores, r, kind is Kind.LRU_SINGLE)
            x = state.x.copy()
            for n, m in act.adds:
                x[n, m] = True
            for n, m in act.evicts:
                x[n, m] = False
            return state.with_x(x)
        p = StageProblem(state, self._weights(t), ctx.costs, ctx.gamma)
        r = spec.r if spec.r is not None else int(state.capacities.sum())
        return solve_stage(p, self.mode, r=r, deltas=self.deltas, max_work=ctx.max_work)


def initial_placement(spec: PolicySpec, ctx: Context) -> CacheState:
    return Policy(spec, ctx).initial()
