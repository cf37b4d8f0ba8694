import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgecache.errors import InvalidParameter
from edgecache.topology import GridTopology, build_grid, cost_matrix, hop_distance


def test_line_topology():
    topo = build_grid(1, 3, 2, 20)
    assert topo.M == 3 and topo.U == 3
    assert [topo.home(u) for u in (1, 2, 3)] == [1, 2, 3]
    assert sorted(topo.links()) == [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]


def test_single_scbs():
    c = cost_matrix(build_grid(1, 1, 2, 20)).c
    assert c.tolist() == [[20], [0]]


def test_ins7_grid():
    topo = build_grid(3, 5, 2, 20)
    assert topo.M == 15
    # 4-neighbour grid links plus one MCBS link per SCBS
    assert len(topo.links()) == 3 * 4 + 2 * 5 + 15


def test_dominance_rule_enforced():
    with pytest.raises(InvalidParameter):
        build_grid(3, 5, 4, 20)  # 6 hops * 4 = 24 >= 20
    build_grid(3, 5, 3, 20)  # 18 < 20 is fine


@pytest.mark.parametrize("rows,cols", [(0, 3), (2, 0)])
def test_empty_grid_rejected(rows, cols):
    with pytest.raises(InvalidParameter):
        build_grid(rows, cols)


def test_hop_distance_examples():
    g = build_grid(2, 3)
    assert hop_distance(g, 4, 4) == 0
    assert hop_distance(g, g.scbs_id(0, 0), g.scbs_id(1, 2)) == 3
    big = build_grid(3, 5)
    assert hop_distance(big, 1, 15) == 6


def test_hop_distance_out_of_range():
    g = build_grid(2, 2)
    with pytest.raises(IndexError):
        hop_distance(g, 0, 1)
    with pytest.raises(IndexError):
        hop_distance(g, 1, 5)


def test_cost_matrix_line():
    c = cost_matrix(build_grid(1, 3, 2, 20))
    assert c.c[1:, 0].tolist() == [0, 2, 4]
    assert np.all(c.mcbs == 20)
    assert c.savings().tolist() == [20 * 3 - 6, 20 * 3 - 4, 20 * 3 - 6]


def test_user_map():
    g = GridTopology(1, 3, user_map={1: 2, 2: 2})
    c = cost_matrix(g)
    assert c.U == 2
    assert c.c[2].tolist() == [0, 0]
    assert g.homes().tolist() == [1, 1]
    with pytest.raises(InvalidParameter):
        GridTopology(1, 3, user_map={1: 4})
    with pytest.raises(InvalidParameter):
        GridTopology(1, 3, user_map={2: 1})


def test_rational_costs():
    from fractions import Fraction
    c = cost_matrix(build_grid(1, 2, Fraction(1, 2), 20))
    assert c.c[2, 0] == Fraction(1, 2)


grids = st.tuples(st.integers(1, 4), st.integers(1, 4))


@given(grids)
def test_symmetry_and_triangle(shape):
    g = build_grid(*shape)
    ids = range(1, g.M + 1)
    for a, b in itertools.product(ids, ids):
        assert hop_distance(g, a, b) == hop_distance(g, b, a)
    for a, b, c in itertools.product(ids, ids, ids):
        assert hop_distance(g, a, c) <= hop_distance(g, a, b) + hop_distance(g, b, c)


@given(grids)
def test_home_cost_zero_and_dominance(shape):
    g = build_grid(*shape)
    c = cost_matrix(g)
    for u in range(1, g.U + 1):
        assert c.c[g.home(u), u - 1] == 0
    assert np.all(c.scbs < c.mcbs[None, :])


@given(st.integers(1, 3), st.integers(1, 3))
def test_adding_column_never_lowers_max_cost(rows, cols):
    a = cost_matrix(build_grid(rows, cols)).c.max()
    b = cost_matrix(build_grid(rows, cols + 1)).c.max()
    assert b >= a
