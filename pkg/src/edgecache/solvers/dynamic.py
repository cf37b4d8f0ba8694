"""Finite-horizon backward induction over full cache configurations.

States are products of per-SCBS content subsets that fit the capacity.
The transition penalty gamma * |x xor x'| splits into a sum over SCBSs,
so the minimisation over successors is done one SCBS axis at a time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..cache_core import CacheState, subset_costs
from ..errors import InstanceTooLarge
from ..topology import CostMatrix
from .exact import popcount_table

DEFAULT_MAX_STATES = 10**5


def _subsets(N: int, b: int, sizes) -> list[int]:
    out = []
    for r in range(N + 1):
        for combo in itertools.combinations(range(N), r):
            if sum(sizes[n] for n in combo) <= b:
                out.append(sum(1 << n for n in combo))
    return out


@dataclass
class BackwardInductionResult:
    V0: float
    values: list  # values[t] = V_t over states, t = 1..T (index 0 unused)
    to_go: list  # to_go[t] = P_t + V_t, the successor score at stage t
    subsets: list[list[int]]
    N: int
    gamma: float
    capacities: np.ndarray

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.subsets)

    @property
    def n_states(self) -> int:
        return math.prod(self.dims)

    @property
    def T(self) -> int:
        return len(self.to_go) - 1

    def state_x(self, s: int) -> np.ndarray:
        ks = np.unravel_index(s, self.dims)
        x = np.zeros((self.N, len(self.dims)), dtype=bool)
        for j, k in enumerate(ks):
            mask = self.subsets[j][k]
            x[:, j] = [(mask >> n) & 1 for n in range(self.N)]
        return x

    def state_index(self, x: np.ndarray) -> int:
        masks = (np.asarray(x).T.astype(np.int64) << np.arange(self.N)).sum(axis=1)
        ks = [self.subsets[j].index(int(m)) for j, m in enumerate(masks)]
        return int(np.ravel_multi_index(ks, self.dims))

    def _changes_from(self, s: int) -> np.ndarray:
        ks = np.unravel_index(s, self.dims)
        d = np.zeros(self.dims, dtype=np.int64)
        pc = popcount_table(self.N)
        for j, k in enumerate(ks):
            row = pc[np.bitwise_xor(np.array(self.subsets[j]), self.subsets[j][k])]
            shape = [1] * len(self.dims)
            shape[j] = -1
            d = d + row.reshape(shape)
        return d.ravel()

    def initial_state(self) -> int:
        """Free first-stage placement; ties prefer fewer cached items."""
        score = self.to_go[1].ravel()
        size = self._changes_from(0)
        return int(np.lexsort((np.arange(len(score)), size, score))[0])

    def best_next(self, t: int, s: int) -> int:
        """Optimal state at stage t (>= 2) when stage t-1 ended in state s."""
        d = self._changes_from(s)
        score = self.gamma * d + self.to_go[t].ravel()
        return int(np.lexsort((np.arange(len(score)), d, score))[0])

    def policy_table(self) -> dict:
        """{(t, s): successor} for t = 2..T plus {(1, None): initial state}."""
        table = {(1, None): self.initial_state()}
        for t in range(2, self.T + 1):
            for s in range(self.n_states):
                table[(t, s)] = self.best_next(t, s)
        return table

    def rollout(self) -> list[int]:
        path = [self.initial_state()]
        for t in range(2, self.T + 1):
            path.append(self.best_next(t, path[-1]))
        return path


def backward_induction(demands, costs: CostMatrix, capacities, gamma,
                       sizes=None, max_states: int = DEFAULT_MAX_STATES) -> BackwardInductionResult:
    """Solve the T-stage cache MDP exactly for known (expected) demands.

    ``demands[t-1]`` is the demand vector of stage t. Stage 1 placement is
    free; later changes cost gamma each; V_T = 0.
    """
    lam = np.atleast_2d(np.asarray(demands, dtype=float))
    T, N = lam.shape
    caps = np.asarray(capacities, dtype=np.int64)
    M = len(caps)
    if costs.M != M:
        raise ValueError("cost table and capacities disagree on M")
    if N > 62:
        raise InstanceTooLarge("backward induction supports at most 62 contents")
    sizes = [1] * N if sizes is None else list(sizes)
    subsets = [_subsets(N, int(b), sizes) for b in caps]
    dims = tuple(len(s) for s in subsets)
    S = math.prod(dims)
    if S > max_states:
        raise InstanceTooLarge(f"{S} states exceed cap {max_states}")
    # holder[s, n] = bitmask of SCBSs caching n in state s
    holder = np.zeros(dims + (N,), dtype=np.int64)
    for j, subs in enumerate(subsets):
        contains = (np.array(subs, dtype=np.int64)[:, None] >> np.arange(N)) & 1  # (K_j, N)
        shape = [1] * M + [N]
        shape[j] = len(subs)
        holder = holder | (contains.reshape(shape) << j)
    holder = holder.reshape(S, N)
    f = subset_costs(costs).astype(float)
    fh = f[holder]  # (S, N) delivery cost per content per state
    pc = popcount_table(N)
    hamming = [pc[np.bitwise_xor.outer(np.array(s), np.array(s))] for s in subsets]

    values = [None] * (T + 1)
    to_go = [None] * (T + 1)
    V = np.zeros(dims)
    values[T] = V
    for t in range(T, 0, -1):
        g = (fh @ lam[t - 1]).reshape(dims) + V
        to_go[t] = g
        if t == 1:
            break
        h = g
        for j in range(M):
            hj = np.moveaxis(h, j, 0)
            flat = hj.reshape(dims[j], -1)
            best = (gamma * hamming[j][:, :, None] + flat[None, :, :]).min(axis=1)
            h = np.moveaxis(best.reshape(hj.shape), 0, j)
        V = h
        values[t - 1] = V
    V0 = float(to_go[1].min())
    return BackwardInductionResult(V0, values, to_go, subsets, N, gamma, caps)


def path_states(result: BackwardInductionResult, path: list[int], capacities, sizes=None) -> list[CacheState]:
    return [CacheState(result.state_x(s), capacities, sizes) for s in path]
