from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cache_core import CacheState, stage_objective
from ..topology import CostMatrix


@dataclass(frozen=True)
class StageProblem:
    """One cache-update decision: move from ``prev_state`` given effective
    per-content demand ``weights`` (immediate plus any look-ahead)."""

    prev_state: CacheState
    weights: np.ndarray
    costs: CostMatrix
    gamma: float

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.shape != (self.prev_state.N,):
            raise ValueError(f"weights shape {w.shape} != ({self.prev_state.N},)")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.costs.M != self.prev_state.M:
            raise ValueError("cost table and cache state disagree on M")
        object.__setattr__(self, "weights", w)

    @property
    def capacities(self) -> np.ndarray:
        return self.prev_state.capacities

    def objective(self, new_state: CacheState):
        return stage_objective(self.prev_state, new_state, self.weights, self.costs, self.gamma)

    def relevant(self) -> np.ndarray:
        """Contents that can matter: positive weight or currently cached.

        An uncached zero-weight content is never worth adding: it costs
        penalty, uses capacity and saves nothing.
        """
        return (self.weights > 0) | self.prev_state.x.any(axis=1)


def integer_scale(values, gamma, costs: CostMatrix, scale: int = 1 << 16):
    """Common multiplier that makes weights and gamma integral (1 if they already are)."""
    w = np.asarray(values, dtype=float)
    exact = (np.all(np.mod(w, 1) == 0) and float(gamma).is_integer()
             and np.issubdtype(costs.c.dtype, np.integer))
    return 1 if exact else scale
