from .assignment import single_copy_static, single_copy_target, solve_single_copy_update
from .dynamic import BackwardInductionResult, backward_induction
from .exact import (
    DEFAULT_MAX_WORK,
    Placement,
    bruteforce_target,
    enumerate_states,
    exact_target,
    greedy_augment,
    solve_exact_update,
    solve_static_placement,
)
from .flow import FlowNetwork, min_cost_flow
from .problem import StageProblem

__all__ = [
    "BackwardInductionResult",
    "DEFAULT_MAX_WORK",
    "FlowNetwork",
    "Placement",
    "StageProblem",
    "backward_induction",
    "bruteforce_target",
    "enumerate_states",
    "exact_target",
    "greedy_augment",
    "min_cost_flow",
    "single_copy_static",
    "single_copy_target",
    "solve_exact_update",
    "solve_single_copy_update",
    "solve_static_placement",
]
