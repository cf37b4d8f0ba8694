from .scenarios import PRESETS, ScenarioSpec, load_scenario, preset, scenario_from_dict
from .simulate import (
    CSV_COLUMNS,
    INF_SENTINEL,
    PolicyRun,
    PolicySummary,
    ReplicationResult,
    SimulationReport,
    cache_hit_ratio,
    proportional_cost,
    run_experiment,
    run_policy,
    run_replication,
)

__all__ = [
    "CSV_COLUMNS",
    "INF_SENTINEL",
    "PRESETS",
    "PolicyRun",
    "PolicySummary",
    "ReplicationResult",
    "ScenarioSpec",
    "SimulationReport",
    "cache_hit_ratio",
    "load_scenario",
    "preset",
    "proportional_cost",
    "run_experiment",
    "run_policy",
    "run_replication",
    "scenario_from_dict",
]
