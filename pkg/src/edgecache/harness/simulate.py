"""Replications, metrics and aggregated reports."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..cache_core import CacheState, diff_action, hit_counts, serving_cost
from ..demand import generate_trace
from ..errors import EdgeCacheError
from ..policies import Context, Kind, Policy, PolicySpec
from .scenarios import ScenarioSpec

INF_SENTINEL = float("inf")
OFFLINE = PolicySpec(Kind.OFFLINE)
LOWER_BOUND = PolicySpec(Kind.CLAIRVOYANT_LB)

CSV_COLUMNS = ("scenario", "policy", "solver_mode", "mean_cost", "stderr_cost", "proportional_cost",
               "hit_ratio", "mean_updates", "wall_ms", "local_hit_ratio", "exact")


def proportional_cost(cost: float, x0: float, lb: float) -> float:
    """(cost - LB) / (x0 - LB); 0 when everything coincides, inf when only x0 == LB."""
    den = x0 - lb
    if den == 0:
        return 0.0 if cost == lb else INF_SENTINEL
    return (cost - lb) / den


def cache_hit_ratio(hits: float, requests: float) -> float | None:
    return hits / requests if requests else None


@dataclass
class PolicyRun:
    name: str
    mode: str
    serving: np.ndarray  # (T,)
    penalty: np.ndarray  # (T,) gamma * changes, zero at stage 1
    updates: np.ndarray  # (T,) cache changes per stage
    requests: float
    hits: float
    local_hits: float
    decision_s: np.ndarray  # (T,) wall time per decision
    exact: bool
    deltas: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(self.serving.sum() + self.penalty.sum())

    @property
    def hit_ratio(self):
        return cache_hit_ratio(self.hits, self.requests)

    @property
    def local_hit_ratio(self):
        return cache_hit_ratio(self.local_hits, self.requests)


@dataclass
class ReplicationResult:
    runs: dict[str, PolicyRun]
    total_requests: float

    @property
    def x0(self) -> float:
        return self.runs[OFFLINE.name].total

    @property
    def lb(self) -> float:
        return self.runs[LOWER_BOUND.name].total


def context_for(spec: ScenarioSpec, trace) -> Context:
    return Context(trace, spec.model(), spec.costs(), spec.capacities(), spec.gamma,
                   default_mode=spec.solver_mode, max_work=spec.max_work, n_initial=spec.n0)


def _annotate(e: EdgeCacheError, name: str, t: int) -> EdgeCacheError:
    try:
        return type(e)(f"{name}, stage {t}: {e}")
    except TypeError:
        return e


def run_policy(policy_spec: PolicySpec, ctx: Context, homes) -> PolicyRun:
    T = ctx.T
    pol = Policy(policy_spec, ctx)
    free = policy_spec.kind is Kind.CLAIRVOYANT_LB
    serving, penalty, updates, dt = (np.zeros(T) for _ in range(4))
    req = hits = local = 0.0
    state: CacheState | None = None
    for t in range(1, T + 1):
        t0 = time.perf_counter()
        try:
            new = pol.initial() if t == 1 else pol.step(t, state)
        except EdgeCacheError as e:
            raise _annotate(e, policy_spec.name, t) from e
        dt[t - 1] = time.perf_counter() - t0
        lam = ctx.demand(t)
        serving[t - 1] = serving_cost(new, lam, ctx.costs)
        if t > 1:
            updates[t - 1] = diff_action(state, new).size
            if not free:
                penalty[t - 1] = ctx.gamma * updates[t - 1]
        r, h, lh = hit_counts(new.x, lam, ctx.costs, homes)
        req, hits, local = req + r, hits + h, local + lh
        state = new
    return PolicyRun(policy_spec.name, pol.mode, serving, penalty, updates, req, hits, local, dt,
                     pol.exact, list(pol.deltas))


def _with_anchors(policies) -> list[PolicySpec]:
    out = list(policies)
    names = {p.name for p in out}
    for anchor in (OFFLINE, LOWER_BOUND):
        if anchor.name not in names:
            out.append(anchor)
    return out


def run_replication(spec: ScenarioSpec, policies, seed) -> ReplicationResult:
    """One demand trace shared by every policy; x0 and LB are always included."""
    model = spec.model()
    trace = generate_trace(model, spec.n0, spec.arrivals_per_stage, T=spec.T, rng=seed)
    ctx = context_for(spec, trace)
    homes = spec.topology().homes()
    runs = {}
    for p in _with_anchors(policies):
        if p.name in runs:
            continue
        runs[p.name] = run_policy(p, ctx, homes)
    return ReplicationResult(runs, trace.total_requests())


def _mean(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


@dataclass
class PolicySummary:
    scenario: str
    policy: str
    solver_mode: str
    mean_cost: float
    stderr_cost: float
    proportional_cost: float
    hit_ratio: float | None
    mean_updates: float
    wall_ms: float
    local_hit_ratio: float | None
    exact: bool
    max_stage_ms: float = 0.0
    n_deltas: int = 0
    max_delta: float | None = None

    def csv_row(self) -> dict:
        row = {c: getattr(self, c) for c in CSV_COLUMNS}
        for key in ("hit_ratio", "local_hit_ratio"):
            row[key] = "NA" if row[key] is None else f"{row[key]:.6f}"
        for key in ("mean_cost", "stderr_cost", "mean_updates", "wall_ms"):
            row[key] = f"{row[key]:.6g}" if key != "mean_cost" else f"{row[key]:.4f}"
        row["proportional_cost"] = "inf" if math.isinf(self.proportional_cost) else f"{self.proportional_cost:.6f}"
        row["exact"] = str(self.exact).lower()
        return row


def summarize(scenario: str, name: str, runs: list[PolicyRun], x0: np.ndarray, lb: np.ndarray) -> PolicySummary:
    costs = np.array([r.total for r in runs])
    n = len(costs)
    stderr = float(costs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    prop = [proportional_cost(c, a, b) for c, a, b in zip(costs, x0, lb)]
    deltas = [d for r in runs for d in r.deltas]
    return PolicySummary(
        scenario=scenario, policy=name, solver_mode=runs[0].mode,
        mean_cost=float(costs.mean()), stderr_cost=stderr,
        proportional_cost=float(np.mean(prop)),
        hit_ratio=_mean([r.hit_ratio for r in runs]),
        mean_updates=float(np.mean([r.updates.sum() for r in runs])),
        wall_ms=float(np.mean([r.decision_s.sum() for r in runs]) * 1e3),
        local_hit_ratio=_mean([r.local_hit_ratio for r in runs]),
        exact=all(r.exact for r in runs),
        max_stage_ms=float(max(r.decision_s.max() for r in runs) * 1e3),
        n_deltas=len(deltas), max_delta=max(deltas) if deltas else None,
    )


@dataclass
class SimulationReport:
    scenario: ScenarioSpec
    seed: int
    replications: int
    rows: list[PolicySummary]
    costs: dict[str, np.ndarray]  # per-replication totals by policy name
    deltas: dict[str, list]

    def row(self, name: str) -> PolicySummary:
        for r in self.rows:
            if r.policy == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r.csv_row())
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            return None if isinstance(v, float) and math.isinf(v) else v
        doc = {
            "scenario": self.scenario.to_dict(),
            "seed": self.seed,
            "replications": self.replications,
            "policies": [{k: clean(v) for k, v in asdict(r).items()} for r in self.rows],
            "per_replication_cost": {k: v.tolist() for k, v in self.costs.items()},
        }
        return json.dumps(doc, indent=2)

    def write(self, csv_path=None, json_path=None):
        if csv_path:
            with open(csv_path, "w", newline="") as fh:
                fh.write(self.to_csv())
        if json_path:
            with open(json_path, "w") as fh:
                fh.write(self.to_json())


def _replicate(args):
    spec, policies, seq = args
    return run_replication(spec, policies, np.random.default_rng(seq))


def run_experiment(spec: ScenarioSpec, policies=None, replications: int | None = None,
                   seed: int | None = None, workers: int = 1) -> SimulationReport:
    """Run independent replications and aggregate per policy.

    Replication i draws from child i of ``SeedSequence(seed)``, so results do
    not depend on ``workers``.
    """
    policies = list(policies if policies is not None else spec.policies)
    reps = spec.replications if replications is None else replications
    seed = spec.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(reps)
    jobs = [(spec, policies, c) for c in children]
    if workers > 1 and reps > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_replicate, jobs))
    else:
        results = [_replicate(j) for j in jobs]
    x0 = np.array([r.x0 for r in results])
    lb = np.array([r.lb for r in results])
    names = list(results[0].runs)
    rows = [summarize(spec.name, n, [r.runs[n] for r in results], x0, lb) for n in names]
    costs = {n: np.array([r.runs[n].total for r in results]) for n in names}
    deltas = {n: [d for r in results for d in r.runs[n].deltas] for n in names}
    return SimulationReport(spec, seed, reps, rows, costs, deltas)
