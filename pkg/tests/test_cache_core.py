import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_costs
from edgecache.cache_core import (
    CacheAction,
    CacheState,
    apply_action,
    count_states,
    diff_action,
    hit_counts,
    is_feasible,
    serving_cost,
    serving_cost_bruteforce,
    single_copy_cost,
    update_penalty,
)
from edgecache.errors import InfeasibleAction, InstanceTooLarge, MultiCopyState
from edgecache.topology import build_grid, cost_matrix, costs_from_array


def state(rows, caps, N):
    x = np.zeros((N, len(caps)), dtype=bool)
    for n, m in rows:
        x[n, m] = True
    return CacheState(x, caps)


def test_capacity_enforced():
    with pytest.raises(InfeasibleAction):
        state([(0, 0), (1, 0)], [1], 2)


def test_apply_action_examples():
    s = CacheState.empty(4, [1])
    assert apply_action(s, CacheAction()) == s
    s2 = apply_action(s, CacheAction({(3, 0)}))
    assert s2.cached_pairs() == {(3, 0)}
    with pytest.raises(InfeasibleAction):
        apply_action(s2, CacheAction({(3, 0)}))


def test_overlapping_add_evict_rejected():
    with pytest.raises(InfeasibleAction):
        CacheAction({(0, 0)}, {(0, 0)})


def test_is_feasible_boundaries():
    s = state([(0, 0)], [2], 3)
    assert not is_feasible(s, CacheAction(evicts={(1, 0)}))
    assert is_feasible(s, CacheAction({(1, 0)}))
    assert not is_feasible(s, CacheAction({(1, 0), (2, 0)}))
    assert is_feasible(s, CacheAction({(1, 0), (2, 0)}, {(0, 0)}))
    assert not is_feasible(s, CacheAction({(5, 0)}))


def test_update_penalty():
    assert update_penalty(CacheAction({(0, 0)}, {(1, 0)}), 100) == 200
    assert update_penalty(CacheAction(), 100) == 0
    assert update_penalty(CacheAction({(0, 0)}, {(1, 1)}), 0) == 0


def test_serving_cost_examples():
    costs = cost_matrix(build_grid(1, 3))
    assert serving_cost(CacheState.empty(1, [1, 1, 1]), [2], costs) == 120
    full = state([(0, 0), (0, 1), (0, 2)], [1, 1, 1], 1)
    assert serving_cost(full, [5], costs) == 0
    mid = state([(0, 1)], [1, 1, 1], 1)
    assert serving_cost(mid, [1], costs) == 2 + 0 + 2


def test_bruteforce_small_cases():
    c = costs_from_array([[20], [7]])
    s = state([(0, 0)], [1], 1)
    assert serving_cost_bruteforce(s, [1], c) == 7
    assert serving_cost_bruteforce(CacheState.empty(2, [1]), [1, 3], c) == 80
    with pytest.raises(InstanceTooLarge):
        serving_cost_bruteforce(state([(0, 0)], [1], 1), [1], costs_from_array([[20] * 5, [1] * 5]), limit=10)


def test_single_copy_cost():
    costs = cost_matrix(build_grid(1, 3))
    s = state([(0, 0), (1, 2)], [1, 1, 1], 3)
    w = [3, 1, 2]
    assert single_copy_cost(s, w, costs) == serving_cost(s, w, costs)
    assert single_copy_cost(CacheState.empty(2, [1]), [1, 1], cost_matrix(build_grid(1, 1))) == 40
    with pytest.raises(MultiCopyState):
        single_copy_cost(state([(0, 0), (0, 1)], [1, 1, 1], 1), [1], costs)


def test_count_states():
    assert count_states(10, 2, 3) == 30976
    assert count_states(7, 1, 7) == 2 ** 7
    assert count_states(5, 2, 1) == 36


def test_csv_roundtrip():
    s = state([(0, 1), (2, 0)], [1, 1], 3)
    text = s.to_csv()
    assert text.splitlines() == ["content_id,scbs_id", "0,2", "2,1"]
    assert CacheState.from_csv(text, 3, [1, 1]) == s


def test_hit_counts_hand_count():
    # two contents on a 1x3 line, content 0 cached at SCBS 1 only
    costs = cost_matrix(build_grid(1, 3))
    homes = build_grid(1, 3).homes()
    x = np.array([[True, False, False], [False, False, False]])
    req, hits, local = hit_counts(x, np.array([4, 6]), costs, homes)
    assert (req, hits, local) == (30, 12, 4)
    everywhere = np.ones((2, 3), dtype=bool)
    assert hit_counts(everywhere, [4, 6], costs, homes)[1:] == (30, 30)


@st.composite
def instances(draw, max_n=4, max_m=3, max_u=3):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    N, M, U = draw(st.integers(1, max_n)), draw(st.integers(1, max_m)), draw(st.integers(1, max_u))
    costs = random_costs(rng, M, U)
    x = rng.random((N, M)) < 0.5
    w = rng.integers(0, 4, size=N)
    return x, w, costs


@given(instances())
def test_serving_cost_matches_bruteforce(inst):
    x, w, costs = inst
    assert serving_cost(x, w, costs) == serving_cost_bruteforce(x, w, costs)


@given(instances())
def test_caching_never_hurts(inst):
    x, w, costs = inst
    base = serving_cost(x, w, costs)
    assert base <= w.sum() * costs.mcbs.sum()
    for n, m in zip(*np.nonzero(~x)):
        y = x.copy()
        y[n, m] = True
        assert serving_cost(y, w, costs) <= base


@given(instances(max_n=6))
def test_single_copy_closed_form(inst):
    x, w, costs = inst
    # keep only the first copy of each content
    first = np.zeros_like(x)
    rows = np.flatnonzero(x.any(axis=1))
    first[rows, x[rows].argmax(axis=1)] = True
    assert single_copy_cost(first, w, costs) == serving_cost(first, w, costs)


@given(st.integers(0, 2**32 - 1))
def test_action_reverse_restores(seed):
    rng = np.random.default_rng(seed)
    caps = rng.integers(0, 3, size=3)
    a = b = CacheState.empty(5, caps)
    xa = np.zeros((5, 3), dtype=bool)
    xb = np.zeros((5, 3), dtype=bool)
    for j, cap in enumerate(caps):
        xa[rng.choice(5, cap, replace=False), j] = True
        xb[rng.choice(5, cap, replace=False), j] = True
    a, b = a.with_x(xa), b.with_x(xb)
    act = diff_action(a, b)
    assert is_feasible(a, act)
    assert apply_action(a, act) == b
    assert apply_action(b, act.reversed()) == a
