"""Scenario definitions: the Ins 1.1 - Ins 7.4 presets and JSON config files."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..demand import DEFAULT_BETA, ArModel, diurnal_profile, flat_profile
from ..errors import InvalidParameter, ScenarioParseError, ValidationError
from ..policies import SOLVER_MODES, PolicySpec
from ..topology import CostMatrix, GridTopology, build_grid, cost_matrix
from ..solvers import DEFAULT_MAX_WORK


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    rows: int
    cols: int
    n0: int
    capacity: int
    gamma: float
    arrivals_per_stage: int = 0
    hop_cost: float = 2
    mcbs_cost: float = 20
    T: int = 24
    beta: tuple = DEFAULT_BETA
    noise_sigma: float = 1.0
    mu_profile: str | tuple = "diurnal"
    zipf_skew: float = 0.8
    base_rate: float = 5.0
    level_normalized: bool = True
    replications: int = 100
    seed: int = 42
    solver_mode: str = "exact"
    max_work: int = DEFAULT_MAX_WORK
    policies: tuple = field(default=())

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out = []
        if self.rows < 1 or self.cols < 1:
            out.append("rows and cols must be >= 1")
        if self.n0 < 0:
            out.append("n0 must be >= 0")
        if self.arrivals_per_stage < 0:
            out.append("arrivals_per_stage must be >= 0")
        if self.n0 + self.arrivals_per_stage == 0:
            out.append("catalog is empty at stage 1")
        if self.capacity < 0:
            out.append("capacity must be >= 0")
        if self.gamma < 0:
            out.append("gamma must be >= 0")
        if self.T < 1:
            out.append("T must be >= 1")
        if self.replications < 1:
            out.append("replications must be >= 1")
        if self.solver_mode not in SOLVER_MODES:
            out.append(f"solver_mode must be one of {SOLVER_MODES}")
        if isinstance(self.mu_profile, str):
            if self.mu_profile not in ("flat", "diurnal"):
                out.append("mu_profile must be 'flat', 'diurnal' or a list of T levels")
        elif len(self.mu_profile) != self.T:
            out.append(f"mu_profile has {len(self.mu_profile)} entries, expected T={self.T}")
        if self.rows >= 1 and self.cols >= 1 and not self.mcbs_cost > self.hop_cost * (self.rows + self.cols - 2):
            out.append("mcbs_cost must exceed hop_cost times the grid diameter")
        try:
            self.model()
        except InvalidParameter as e:
            out.append(str(e))
        return out

    @property
    def M(self) -> int:
        return self.rows * self.cols

    def topology(self) -> GridTopology:
        return build_grid(self.rows, self.cols, self.hop_cost, self.mcbs_cost)

    def costs(self) -> CostMatrix:
        return cost_matrix(self.topology())

    def capacities(self) -> np.ndarray:
        return np.full(self.M, self.capacity, dtype=np.int64)

    def mu(self) -> tuple:
        if self.mu_profile == "flat":
            return flat_profile(self.T)
        if self.mu_profile == "diurnal":
            return diurnal_profile(self.T)
        return tuple(self.mu_profile)

    def model(self) -> ArModel:
        return ArModel(tuple(self.beta), self.mu(), self.noise_sigma, self.zipf_skew,
                       self.base_rate, self.level_normalized)

    def ratio(self) -> float:
        """Total cache capacity over the initial catalog size."""
        return self.M * self.capacity / self.n0 if self.n0 else float("inf")

    def catalog_trajectory(self) -> list[int]:
        return [self.n0 + self.arrivals_per_stage * t for t in range(1, self.T + 1)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["beta"] = list(self.beta)
        if not isinstance(self.mu_profile, str):
            d["mu_profile"] = list(self.mu_profile)
        d["policies"] = [_policy_to_dict(p) for p in self.policies]
        return d


# (rows, cols, N0, arrivals, capacities, default solver)
_GROUPS = {
    1: (1, 3, 10, 1, (1, 2, 3, 4), "exact"),
    2: (1, 3, 100, 2, (10, 20, 30, 40), "exact"),
    3: (2, 3, 100, 2, (4, 8, 12, 17), "single_copy_flow"),
    4: (2, 3, 500, 5, (20, 40, 60, 80), "greedy"),
    5: (3, 4, 500, 5, (10, 20, 30, 40), "greedy"),
    6: (3, 4, 1000, 10, (20, 40, 60, 80), "greedy"),
    7: (3, 5, 1000, 10, (17, 33, 50, 66), "greedy"),
}


def _build_presets() -> dict[str, ScenarioSpec]:
    out = {}
    for g, (rows, cols, n0, arr, caps, mode) in _GROUPS.items():
        for k, b in enumerate(caps, start=1):
            name = f"ins{g}.{k}"
            out[name] = ScenarioSpec(name=name, rows=rows, cols=cols, n0=n0, capacity=b, gamma=100,
                                     arrivals_per_stage=arr, solver_mode=mode)
    return out


PRESETS = _build_presets()


def preset(name: str) -> ScenarioSpec:
    key = re.sub(r"[\s_]", "", name.strip().lower())
    if key not in PRESETS:
        raise KeyError(name)
    return PRESETS[key]


_REQUIRED = ("rows", "cols", "n0", "capacity", "gamma")
_POLICY_KEYS = {"policy.kind": "kind", "policy.r": "r", "policy.horizon": "horizon",
                "policy.solver_mode": "solver_mode", "policy.decay": "decay", "policy.label": "label"}


def _policy_to_dict(p: PolicySpec) -> dict:
    d = {"policy.kind": p.kind.value, "policy.horizon": p.horizon}
    for key, attr in (("policy.r", "r"), ("policy.solver_mode", "solver_mode"), ("policy.label", "label")):
        if getattr(p, attr) is not None:
            d[key] = getattr(p, attr)
    if p.decay != 0.5:
        d["policy.decay"] = p.decay
    return d


def _policy_from_dict(d: dict, where: str) -> PolicySpec:
    unknown = set(d) - set(_POLICY_KEYS)
    if unknown:
        raise ValidationError(f"{where}: unknown policy keys {sorted(unknown)}")
    if "policy.kind" not in d:
        raise ValidationError(f"{where}: missing policy.kind")
    try:
        return PolicySpec(**{_POLICY_KEYS[k]: v for k, v in d.items()})
    except (ValueError, TypeError) as e:
        raise ValidationError(f"{where}: {e}") from e


def scenario_from_dict(data: dict) -> ScenarioSpec:
    if not isinstance(data, dict):
        raise ValidationError("scenario document must be a JSON object")
    data = dict(data)
    base = None
    if "preset" in data:
        try:
            base = preset(str(data.pop("preset")))
        except KeyError as e:
            raise ValidationError(f"unknown preset {e.args[0]!r}") from None
    known = {f.name for f in fields(ScenarioSpec)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"unknown fields {unknown}")
    if base is None:
        missing = [k for k in _REQUIRED if k not in data]
        if missing:
            raise ValidationError([f"missing required field {k!r}" for k in missing])
        data.setdefault("name", "custom")
    if "policies" in data:
        data["policies"] = tuple(_policy_from_dict(p, f"policies[{i}]") for i, p in enumerate(data["policies"]))
    for key in ("beta", "mu_profile"):
        if isinstance(data.get(key), list):
            data[key] = tuple(data[key])
    try:
        return replace(base, **data) if base is not None else ScenarioSpec(**data)
    except TypeError as e:
        raise ValidationError(str(e)) from e


def load_scenario(ref: str | Path) -> ScenarioSpec:
    """Preset name (``ins1.1``) or path to a JSON scenario file."""
    try:
        return preset(str(ref))
    except KeyError:
        pass
    path = Path(ref)
    if not path.exists():
        raise ValidationError(f"{ref!r} is neither a preset nor an existing file")
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    return scenario_from_dict(data)
