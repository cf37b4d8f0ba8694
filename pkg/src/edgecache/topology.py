"""SCBS grid networks and delivery-cost tables.

SCBS ids run 1..M in row-major order over the grid; id 0 is the MCBS.
Users are numbered 1..U and each is homed at one SCBS. Cost tables are
stored densely as ``c[m, u - 1]`` for ``m`` in ``0..M``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import InvalidParameter

DEFAULT_HOP_COST = 2
DEFAULT_MCBS_COST = 20


def _as_number(value: Real):
    # keep integers as ints so cost tables stay exactly comparable
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


@dataclass(frozen=True)
class GridTopology:
    rows: int
    cols: int
    hop_cost: Real = DEFAULT_HOP_COST
    mcbs_cost: Real = DEFAULT_MCBS_COST
    user_map: dict[int, int] = field(default=None)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameter(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.hop_cost < 0:
            raise InvalidParameter("hop_cost must be nonnegative")
        max_hops = (self.rows - 1) + (self.cols - 1)
        if not self.mcbs_cost > self.hop_cost * max_hops:
            raise InvalidParameter(
                f"mcbs_cost={self.mcbs_cost} must exceed hop_cost*max_hops="
                f"{self.hop_cost * max_hops}; MCBS delivery has to be the most expensive"
            )
        object.__setattr__(self, "hop_cost", _as_number(self.hop_cost))
        object.__setattr__(self, "mcbs_cost", _as_number(self.mcbs_cost))
        umap = self.user_map
        if umap is None:
            umap = {u: u for u in range(1, self.M + 1)}
        else:
            umap = dict(umap)
            if sorted(umap) != list(range(1, len(umap) + 1)):
                raise InvalidParameter("user ids must be 1..U without gaps")
            bad = [m for m in umap.values() if not 1 <= m <= self.M]
            if bad:
                raise InvalidParameter(f"users homed at unknown SCBS ids {bad}")
        object.__setattr__(self, "user_map", umap)

    @property
    def M(self) -> int:
        return self.rows * self.cols

    @property
    def U(self) -> int:
        return len(self.user_map)

    def coords(self, m: int) -> tuple[int, int]:
        self._check(m)
        return divmod(m - 1, self.cols)

    def scbs_id(self, row: int, col: int) -> int:
        return row * self.cols + col + 1

    def links(self) -> list[tuple[int, int]]:
        """4-neighbour SCBS links; every SCBS is additionally linked to the MCBS (id 0)."""
        out = []
        for r in range(self.rows):
            for c in range(self.cols):
                m = self.scbs_id(r, c)
                if c + 1 < self.cols:
                    out.append((m, self.scbs_id(r, c + 1)))
                if r + 1 < self.rows:
                    out.append((m, self.scbs_id(r + 1, c)))
        out.extend((0, m) for m in range(1, self.M + 1))
        return out

    def home(self, u: int) -> int:
        return self.user_map[u]

    def homes(self) -> np.ndarray:
        """0-based SCBS column of every user, in user order (for array code)."""
        return np.array([self.user_map[u] - 1 for u in range(1, self.U + 1)], dtype=np.int64)

    def _check(self, m: int):
        if not 1 <= m <= self.M:
            raise IndexError(f"SCBS id {m} out of range 1..{self.M}")


def build_grid(rows: int, cols: int, hop_cost: Real = DEFAULT_HOP_COST,
               mcbs_cost: Real = DEFAULT_MCBS_COST, user_map=None) -> GridTopology:
    return GridTopology(rows, cols, hop_cost, mcbs_cost, user_map)


def hop_distance(topo: GridTopology, m1: int, m2: int) -> int:
    r1, c1 = topo.coords(m1)
    r2, c2 = topo.coords(m2)
    return abs(r1 - r2) + abs(c1 - c2)


@dataclass(frozen=True)
class CostMatrix:
    """Delivery cost from source ``m`` (0 = MCBS) to user column ``u``."""

    c: np.ndarray

    def __post_init__(self):
        self.c.setflags(write=False)

    @property
    def M(self) -> int:
        return self.c.shape[0] - 1

    @property
    def U(self) -> int:
        return self.c.shape[1]

    @property
    def mcbs(self) -> np.ndarray:
        return self.c[0]

    @property
    def scbs(self) -> np.ndarray:
        return self.c[1:]

    def savings(self) -> np.ndarray:
        """Per-SCBS saving s_m = sum_u (c_0^u - c_m^u) of serving everyone from m."""
        return (self.mcbs[None, :] - self.scbs).sum(axis=1)

    def all_mcbs_cost(self) -> Real:
        return self.mcbs.sum()


def cost_matrix(topo: GridTopology) -> CostMatrix:
    M, U = topo.M, topo.U
    integral = isinstance(topo.hop_cost, int) and isinstance(topo.mcbs_cost, int)
    c = np.zeros((M + 1, U), dtype=np.int64 if integral else float)
    c[0, :] = topo.mcbs_cost
    for u in range(1, U + 1):
        h = topo.home(u)
        for m in range(1, M + 1):
            c[m, u - 1] = topo.hop_cost * hop_distance(topo, h, m)
    return CostMatrix(c)


def costs_from_array(c) -> CostMatrix:
    """Wrap an explicit (M+1, U) table, checking the MCBS-dominance invariant."""
    c = np.array(c)
    if c.ndim != 2 or c.shape[0] < 2:
        raise InvalidParameter("cost table must have shape (M+1, U) with M >= 1")
    if np.any(c < 0):
        raise InvalidParameter("costs must be nonnegative")
    if not np.all(c[1:] < c[0][None, :]):
        raise InvalidParameter("every SCBS cost must be below the MCBS cost")
    return CostMatrix(c)
