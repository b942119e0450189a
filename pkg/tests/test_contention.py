import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skyrelay.channel import Link
from skyrelay.contention import (
    FD_CONFLICT, NODE_CONFLICT, RI_CONFLICT, ContentionGraph, adjacent, build_graph,
    flow_grouping, generate_group, link_conflicts, relative_interference,
)

from conftest import make_state

NV = 10  # nodes >= NV are UAVs in the adjacency tests


@pytest.mark.parametrize("a,b,expected", [
    ((0, 1), (2, 3), False),
    ((0, 1), (0, 3), True),     # same transmitter
    ((0, 1), (2, 1), True),     # same receiver
    ((0, 1), (1, 2), False),    # vehicle relays full duplex
    ((0, 10), (10, 2), True),   # UAV half duplex
    ((10, 1), (2, 10), True),
    ((10, 1), (11, 2), False),
])
def test_adjacent(a, b, expected):
    la, lb = Link(0, 0, *a), Link(1, 0, *b)
    assert adjacent(la, lb, NV) is expected
    assert adjacent(lb, la, NV) is expected


def test_relative_interference_scalar(det_params):
    # receiver at x=1000 on lane 0, desired tx 50 m ahead, interferer 143 lanes across
    # (500.5 m) at the same x: deviation exactly 90 degrees
    st = make_state([(0, 1000, 20), (0, 1050, 20), (143, 1000, 20), (143, 3000, 20)], lanes=150)
    got = relative_interference(Link(0, 0, 1, 0), Link(1, 0, 2, 3), st, det_params)
    expected = 10 ** ((11.0 - 20.0) / 10) * (50 / 500.5) ** 2.5
    assert got == pytest.approx(expected, rel=1e-9)
    assert got == pytest.approx(10 ** -3.4, rel=1e-2)


def test_relative_interference_same_direction(det_params):
    st = make_state([(0, 1000, 20), (0, 1050, 20), (0, 1000, 20), (0, 3000, 20)])
    # interferer 2000 m straight ahead of the receiver's beam: ratio = (50 / 2000)^2.5
    got = relative_interference(Link(0, 0, 1, 0), Link(1, 0, 3, 2), st, det_params)
    assert got == pytest.approx((50 / 2000) ** 2.5, rel=1e-6)


def test_relative_interference_vanishes_far_away(det_params):
    near = make_state([(0, 1000, 20), (0, 1050, 20), (0, 900, 20), (0, 800, 20)])
    far = make_state([(0, 1000, 20), (0, 1050, 20), (0, 900, 20), (0, 3900, 20)])
    v, i = Link(0, 0, 1, 0), Link(1, 0, 3, 2)
    assert relative_interference(v, i, far, det_params) < relative_interference(v, i, near, det_params)
    with pytest.raises(ValueError):
        relative_interference(v, Link(1, 0, 0, 3), near, det_params)


def test_ri_collocated_boresight_is_one(det_params):
    st = make_state([(0, 1000, 20), (0, 1050, 20), (0, 1050, 20), (0, 2000, 20)])
    v, i = Link(0, 0, 1, 0), Link(1, 0, 2, 3)
    assert relative_interference(v, i, st, det_params) == pytest.approx(1.0)


def test_graph_single_flow(det_params):
    st = make_state([(0, 1000, 20), (0, 1050, 20)])
    g = build_graph({0: (Link(0, 0, 0, 1),)}, st, 1e-3, det_params)
    assert g.vertices == [0] and not g.edges


def test_graph_shared_relay_is_node_conflict(det_params):
    st = make_state([(1, 1000, 20), (1, 1100, 20), (0, 1050, 20), (1, 3000, 20), (1, 3100, 20)])
    paths = {0: (Link(0, 1, 0, 2), Link(0, 2, 2, 1)), 1: (Link(1, 1, 3, 2), Link(1, 2, 2, 4))}
    g = build_graph(paths, st, np.inf, det_params)
    assert g.reason(0, 1) == NODE_CONFLICT


def test_graph_infinite_sigma_node_disjoint_is_edgeless(det_params):
    rng = np.random.default_rng(2)
    st = make_state([(int(l), float(x), 20) for l, x in
                     zip(rng.integers(0, 3, 12), rng.uniform(0, 2000, 12))])
    paths = {k: (Link(k, 0, 2 * k, 2 * k + 1),) for k in range(6)}
    assert not build_graph(paths, st, np.inf, det_params).edges
    assert build_graph(paths, st, 0.0, det_params).edges


def test_fd_edge_when_relay_self_interference_large(det_params):
    # vehicle 1 receives flow 0 and transmits flow 1: beta*Pt / desired = 1e-8 / 1.78e-10 ~ 56
    st = make_state([(0, 1000, 20), (0, 1100, 20), (0, 1300, 20), (2, 5000, 20)])
    paths = {0: (Link(0, 0, 0, 1),), 1: (Link(1, 0, 1, 2),)}
    assert build_graph(paths, st, 1e-3, det_params).reason(0, 1) == FD_CONFLICT
    assert not build_graph(paths, st, 100.0, det_params).edges


def test_link_conflict_codes_symmetric(det_params):
    rng = np.random.default_rng(4)
    st = make_state([(int(l), float(x), 20) for l, x in
                     zip(rng.integers(0, 3, 16), rng.uniform(0, 3000, 16))])
    links = [Link(k, 0, 2 * k, 2 * k + 1) for k in range(8)]
    c = link_conflicts(links, links, st, det_params, 1e-4)
    assert np.array_equal(c, c.T)
    assert set(np.unique(c)) <= {0, 1, 2, 3}


def test_path_graph_grouping():
    a, b, c = 0, 1, 2
    g = ContentionGraph.from_edges([a, b, c], [(a, b), (b, c)])
    assert [sorted(x) for x in flow_grouping(g)] == [[a, c], [b]]


def test_generate_group_tie_breaks_on_id():
    g = ContentionGraph.from_edges([3, 5, 7], [(3, 5), (5, 7), (3, 7)])
    assert generate_group(g.vertices, g.adj) == [3]


def test_edge_reason_priority():
    g = ContentionGraph([0, 1])
    g.add_edge(0, 1, RI_CONFLICT)
    g.add_edge(1, 0, NODE_CONFLICT)  # first reason kept; build_graph resolves priority up front
    assert g.reason(0, 1) == RI_CONFLICT
    with pytest.raises(ValueError):
        g.add_edge(1, 1, RI_CONFLICT)


def is_partition_into_independent_sets(groups, vertices, edges):
    seen = [v for grp in groups for v in grp]
    if sorted(seen) != sorted(vertices):
        return False
    es = {frozenset(e) for e in edges}
    return all(frozenset(p) not in es for grp in groups for p in itertools.combinations(grp, 2))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=28))))
def test_grouping_partitions_into_independent_sets(data):
    n, raw = data
    edges = {(min(a, b), max(a, b)) for a, b in raw if a != b}
    g = ContentionGraph.from_edges(range(n), edges)
    groups = flow_grouping(g)
    assert is_partition_into_independent_sets(groups, list(range(n)), edges)
    # each greedy group is maximal inside what was left when it was built
    left = set(range(n))
    for grp in groups:
        for v in left - set(grp):
            assert any(g.has_edge(v, u) for u in grp)
        left -= set(grp)
