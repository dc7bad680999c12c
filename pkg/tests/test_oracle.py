import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpebble.engine import CLASSICAL_PARALLEL, QUANTUM_PARALLEL, PebbleTrace, verify
from qpebble.errors import InvalidParameterError
from qpebble.graph import Dag, line_graph
from qpebble.oracle import (
    SearchSpec,
    from_mask,
    optimal_cumulative,
    optimal_space_time,
    optimal_time,
    parent_masks,
    successors,
    to_mask,
)
from qpebble.strategies import chunked_line_strategy
from reference import brute_force_min_time, random_forward_edges


def spec(g, target, cap, **kw):
    return SearchSpec(g, frozenset(target), cap, **kw)


def test_single_node():
    assert optimal_time(spec(line_graph(1), {1}, 1)).value == 1


def test_two_node_line():
    res = optimal_time(spec(line_graph(2), {2}, 2))
    assert res.value == 3
    assert res.witness.config_list() == [set(), {1}, {1, 2}, {2}]
    best = optimal_space_time(line_graph(2))
    assert (best.space, best.time, best.space_time) == (2, 3, 6)


def test_unreachable_under_cap():
    assert not optimal_time(spec(line_graph(3), {3}, 1)).reachable
    assert not optimal_time(spec(line_graph(3), {1, 2}, 1)).reachable


def test_refuses_large_graphs():
    with pytest.raises(InvalidParameterError):
        spec(line_graph(25), {25}, 3)


def test_empty_target():
    assert optimal_time(spec(line_graph(3), set(), 0)).value == 0


@pytest.mark.parametrize("cap", [2, 3])
def test_three_node_line_matches_full_enumeration(cap):
    g = line_graph(3)
    expected = brute_force_min_time(3, g.edges, {3}, cap, 8)
    assert optimal_time(spec(g, {3}, cap)).value == expected


@settings(max_examples=25)
@given(st.integers(1, 5), st.integers(0, 2**32), st.data())
def test_bfs_matches_brute_force_on_random_dags(n, seed, data):
    g = Dag.from_edges(n, random_forward_edges(random.Random(seed), n))
    cap = data.draw(st.integers(1, n))
    target = g.sinks
    for model in ("quantum", "classical"):
        got = optimal_time(spec(g, target, cap, model=model)).value
        assert got == brute_force_min_time(n, g.edges, target, cap, 2 * n + 2, quantum=model == "quantum")


def test_worked_line_is_optimal():
    best = optimal_space_time(line_graph(9))
    assert best.space_time == 85


@pytest.mark.parametrize("n", range(1, 9))
def test_witness_traces_are_legal(n):
    g = line_graph(n)
    best = optimal_space_time(g)
    assert verify(best.witness, g) == []
    assert best.witness.t == best.time


@settings(max_examples=30)
@given(st.integers(1, 7), st.integers(0, 2**32))
def test_classical_never_slower(n, seed):
    g = Dag.from_edges(n, random_forward_edges(random.Random(seed), n))
    for cap in range(1, n + 1):
        q = optimal_time(spec(g, g.sinks, cap)).value
        c = optimal_time(spec(g, g.sinks, cap, model="classical")).value
        if q is not None:
            assert c is not None and c <= q


@settings(max_examples=30)
@given(st.integers(1, 7), st.integers(0, 2**32))
def test_time_monotone_in_cap(n, seed):
    g = Dag.from_edges(n, random_forward_edges(random.Random(seed), n))
    times = [optimal_time(spec(g, g.sinks, cap)).value for cap in range(1, n + 1)]
    reached = [t for t in times if t is not None]
    assert reached == sorted(reached, reverse=True)
    # once reachable, stays reachable
    first = next((i for i, t in enumerate(times) if t is not None), len(times))
    assert all(t is not None for t in times[first:])


@settings(max_examples=60)
@given(st.integers(1, 8), st.integers(0, 2**32), st.data())
def test_successors_agree_with_verify(n, seed, data):
    g = Dag.from_edges(n, random_forward_edges(random.Random(seed), n))
    state = to_mask(data.draw(st.sets(st.integers(1, n))))
    pm = parent_masks(g)
    prev = from_mask(state)
    for model, regime in (("quantum", QUANTUM_PARALLEL), ("classical", CLASSICAL_PARALLEL)):
        succ = set(successors(state, pm, n, n, model))
        for q in range(1 << n):
            if q == state:
                continue
            cur = from_mask(q)
            legal = not [v for v in verify(PebbleTrace.from_configs(n, [set(), prev, cur], cur), g, regime) if v.round == 2]
            assert (q in succ) == legal


def test_cumulative_objective():
    res = optimal_cumulative(spec(line_graph(2), {2}, 2, objective="min_cc"))
    assert res.value == 1 + 2 + 1
    assert optimal_time(spec(line_graph(2), {2}, 2, objective="min_cc")).value == 4


def test_strategies_never_beat_oracle():
    for n in range(1, 9):
        best = optimal_space_time(line_graph(n)).space_time
        for k in range(1, n + 1):
            tr = chunked_line_strategy(n, k)
            assert tr.t * max(len(c) for c in tr.configs()) >= best
