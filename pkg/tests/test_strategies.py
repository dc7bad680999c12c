import math
import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpebble.depth_reduction import corollary_params, reduce_layered
from qpebble.engine import PebbleTrace, cost, verify
from qpebble.errors import InvalidParameterError, PreconditionError
from qpebble.graph import (
    Dag,
    depth,
    fixed_example_ed,
    fixed_example_trans,
    line_graph,
    longest_path_to,
    make_graph,
    num_skip,
    sample_drsample,
)
from qpebble.strategies import (
    RecursionPlan,
    _ATable,
    best_line_plan,
    chunked_line_strategy,
    drsample_attack,
    ed_cost,
    ed_space_bound,
    ed_strategy,
    last_add,
    last_delete,
    last_delete_table,
    line_cost,
    naive_strategy,
    recursive_line_strategy,
    trans,
    trans_schedule,
    trans_st_bound,
)
from reference import random_forward_edges
from test_engine import LINE9_TRACE

ED_SET = {1, 5, 9, 13}


@st.composite
def forward_dags(draw, min_n=1, max_n=30):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32))
    return Dag.from_edges(n, random_forward_edges(random.Random(seed), n))


@st.composite
def line_traces(draw, max_m=40):
    """A legal pebbling of some line graph from one of the line strategies."""
    m = draw(st.integers(1, max_m))
    kind = draw(st.sampled_from(["chunked", "recursive"]))
    if kind == "chunked":
        return chunked_line_strategy(m, draw(st.integers(1, m)))
    levels = draw(st.integers(1, 4))
    return recursive_line_strategy(m, RecursionPlan.for_levels(m, levels))


# ---------------------------------------------------------------------------
# naive


def test_naive_small_lines():
    c = cost(naive_strategy(line_graph(3)))
    assert (c.time, c.space, c.space_time) == (5, 3, 15)
    assert naive_strategy(line_graph(1)).config_list() == [set(), {1}]


def test_naive_on_fixed_example():
    g = fixed_example_ed()
    tr = naive_strategy(g)
    assert verify(tr, g) == []
    assert (cost(tr).time, cost(tr).space) == (31, 16)


@given(forward_dags())
def test_naive_legal_on_any_forward_dag(g):
    tr = naive_strategy(g)
    assert verify(tr, g) == []
    assert cost(tr).space == g.n
    assert tr.t == 2 * g.n - len(g.sinks)


# ---------------------------------------------------------------------------
# chunked and recursive line strategies


def test_chunked_reproduces_worked_trace():
    tr = chunked_line_strategy(9, 3)
    assert tr.config_list() == [frozenset(c) for c in LINE9_TRACE]
    c = cost(tr)
    assert (c.time, c.space, c.space_time) == (17, 5, 85)


@pytest.mark.parametrize("n", [1, 2, 7, 20])
def test_one_chunk_is_naive(n):
    assert chunked_line_strategy(n, n).steps == naive_strategy(line_graph(n)).steps
    assert chunked_line_strategy(n, 1).steps == naive_strategy(line_graph(n)).steps


@pytest.mark.parametrize("n, k", [(5, 0), (5, 6), (0, 1)])
def test_chunked_parameter_range(n, k):
    with pytest.raises(InvalidParameterError):
        chunked_line_strategy(n, k)


def test_chunked_bounds_exhaustive_small():
    for n in range(1, 41):
        g = line_graph(n)
        for k in range(1, n + 1):
            tr = chunked_line_strategy(n, k)
            c = cost(tr)
            assert c.space <= k + math.ceil(n / k)
            assert c.time <= 2 * n
            assert verify(tr, g) == []


@settings(max_examples=150)
@given(st.integers(1, 512), st.data())
def test_chunked_bounds(n, data):
    k = data.draw(st.integers(1, n))
    tr = chunked_line_strategy(n, k)
    c = cost(tr)
    assert c.space <= k + math.ceil(n / k)
    assert c.time == 2 * n - 1
    assert verify(tr, line_graph(n)) == []


def test_plan_validation():
    with pytest.raises(InvalidParameterError):
        RecursionPlan(())
    with pytest.raises(InvalidParameterError):
        RecursionPlan((3, 1))
    with pytest.raises(InvalidParameterError):
        recursive_line_strategy(10, RecursionPlan((3, 3)))


@pytest.mark.parametrize("n, levels", [(9, 2), (10, 2), (64, 3), (65, 3), (1000, 3), (2**16, 4), (2, 5)])
def test_plan_for_levels_is_smallest_cover(n, levels):
    plan = RecursionPlan.for_levels(n, levels)
    k = plan.factors[0]
    assert plan.factors == (k,) * levels
    assert k**levels >= n
    assert k == 2 or (k - 1) ** levels < n


def test_one_level_plan_matches_chunked():
    for n in range(1, 12):
        plan = RecursionPlan((max(2, n),))
        assert recursive_line_strategy(n, plan).steps == chunked_line_strategy(n, n).steps


def test_two_level_plan_is_chunked():
    for n, k in [(9, 3), (10, 4), (30, 5)]:
        plan = RecursionPlan((math.ceil(n / k), k))
        assert recursive_line_strategy(n, plan).steps == chunked_line_strategy(n, k).steps


def test_three_by_two_levels():
    tr = recursive_line_strategy(9, RecursionPlan.uniform(3, 2))
    assert tr.t <= 18 and cost(tr).space <= 6
    assert verify(tr, line_graph(9)) == []


def test_four_by_three_levels():
    tr = recursive_line_strategy(64, RecursionPlan.uniform(4, 3))
    c = cost(tr)
    assert c.time <= 2**2 * 64 and c.space <= 12
    assert verify(tr, line_graph(64)) == []


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("c", [2, 3])
def test_clean_subroutine_bound(k, c):
    n = k**c
    tr = recursive_line_strategy(n, RecursionPlan.uniform(k, c))
    assert tr.final() == {n}
    assert cost(tr).time <= 2 ** (c - 1) * k**c
    assert cost(tr).space <= c * k
    assert verify(tr, line_graph(n)) == []


@given(st.integers(1, 300), st.lists(st.integers(2, 7), min_size=1, max_size=5))
def test_recursive_legal_and_cost_accounting_exact(n, factors):
    while math.prod(factors) < n:
        factors.append(7)
    plan = RecursionPlan(tuple(factors))
    tr = recursive_line_strategy(n, plan)
    assert verify(tr, line_graph(n)) == []
    assert line_cost(n, plan) == cost(tr)


def test_best_line_plan_beats_naive():
    for n in (50, 500, 5000):
        assert line_cost(n, best_line_plan(n)).space_time < 2 * n * n


# ---------------------------------------------------------------------------
# (e, d)-reducible graphs


def test_ed_worked_example():
    g = fixed_example_ed()
    tr = ed_strategy(g, ED_SET, 3)
    configs = tr.config_list()
    assert configs[8] == {1, 2, 5, 6, 7, 8}
    c = cost(tr)
    assert (c.time, c.space, c.space_time) == (32, 9, 288)
    assert verify(tr, g) == []
    assert ed_cost(g, ED_SET, 3) == c


def test_ed_mirror_symmetry():
    g = fixed_example_ed()
    configs = ed_strategy(g, ED_SET, 3).config_list()
    n = g.n
    for j in range(n):
        assert configs[n + j] == configs[n - j] | {n}


def test_ed_rejects_shallow_bound():
    with pytest.raises(PreconditionError, match="path"):
        ed_strategy(fixed_example_ed(), ED_SET, 2)


def _a_sets(g, S, d):
    tables = _ATable(g, frozenset(S), d)
    return {(w, i): tables.layer(w, i) for w in g.nodes() for i in range(1, d + 3)}


def test_a_table_shape():
    g = fixed_example_ed()
    d = 3
    layers = _a_sets(g, ED_SET, d)
    for w in g.nodes():
        assert layers[(w, 1)] == {w}
        assert layers[(w, d + 2)] == set()
        full = longest_path_to(g, w, {x for x in ED_SET if x < w})
        assert max(full.values()) <= d + 1


@given(forward_dags(max_n=18), st.data())
def test_a_set_parents_move_to_deeper_layers(g, data):
    S = data.draw(st.sets(st.sampled_from(list(g.nodes()))))
    d = max(1, depth(g, S))
    layers = _a_sets(g, S, d)
    for w in g.nodes():
        for i in range(1, d + 1):
            par = {p for v in layers[(w, i)] for p in g.parents[v]} - set(S)
            deeper = set().union(*(layers[(w, j)] for j in range(i + 1, d + 3)))
            assert par <= deeper


def test_a_set_parent_can_skip_a_layer():
    # 1 is a parent of 3 but its longest path to 3 goes through 2
    g = Dag.from_edges(3, [(1, 2), (2, 3), (1, 3)])
    layers = _a_sets(g, set(), 2)
    assert layers[(3, 1)] == {3}
    assert layers[(3, 2)] == {2}
    assert layers[(3, 3)] == {1}


@given(forward_dags(max_n=20), st.data())
def test_ed_changes_keep_parents(g, data):
    S = frozenset(data.draw(st.sets(st.sampled_from(list(g.nodes())))))
    d = max(depth(g, S), data.draw(st.integers(0, 3)))
    tr = ed_strategy(g, S, d)
    configs = tr.config_list()
    for v in range(1, g.n + 1):
        prev, cur = configs[v - 1], configs[v]
        changed = (cur - prev) | (prev - cur)
        par = {p for x in changed for p in g.parents[x]}
        assert par <= prev & cur
    assert verify(tr, g) == []
    assert tr.t == 2 * g.n
    assert cost(tr).space <= len(S) + 8 * d * 2**d + 3 + len(g.sinks)


@pytest.mark.parametrize("family", ["argon2i_a", "argon2i_b"])
def test_ed_on_argon2i_with_layered_set(family):
    n = 2**10
    g = make_graph(family, n, 5)
    lam, d_prime = corollary_params(family, n)
    ds = reduce_layered(g, lam, d_prime)
    assert ds.verified
    d = depth(g, ds.S)
    tr = ed_strategy(g, ds.S, d)
    assert verify(tr, g) == []
    assert cost(tr).space <= ed_space_bound(ds.e, d)


# ---------------------------------------------------------------------------
# LastDelete / LastAdd


def test_last_add_on_six_node_line():
    p = chunked_line_strategy(6, 3)
    assert p.t == 11
    assert last_add(p) == 6


def test_last_delete_of_sink_is_final_round():
    p = chunked_line_strategy(9, 3)
    assert last_delete(p, 9) == p.t


def test_last_delete_not_found():
    p = PebbleTrace.from_configs(3, [set(), {1}], {1})
    with pytest.raises(KeyError):
        last_delete(p, 3)


@given(line_traces())
def test_last_delete_strictly_decreasing(p):
    table = last_delete_table(p)
    assert table[p.n] == p.t
    for u in range(1, p.n - 1):
        assert table[u] > table[u + 1]
    assert last_add(p) <= p.t


# ---------------------------------------------------------------------------
# Trans


@pytest.mark.parametrize("k", range(1, 7))
def test_trans_round_count_on_fixture(k):
    g = fixed_example_trans()
    p = chunked_line_strategy(6, k)
    assert p.t == 11
    tr = trans(g, p, 3)
    assert tr.t == 35
    assert len(tr.config_list()) == 36  # P_0 plus 35 rounds
    assert verify(tr, g) == []


def test_trans_schedule_fields():
    sched = trans_schedule(18, chunked_line_strategy(6, 3), 3)
    assert (sched.num_blocks, sched.last_block_size, sched.last_add, sched.rounds) == (6, 3, 6, 35)


def test_trans_rejects_illegal_line_pebbling():
    walking = PebbleTrace.from_configs(3, [set(), {1}, {1, 2}, {2, 3}, {3}], {3})
    with pytest.raises(PreconditionError):
        trans(line_graph(9), walking, 3)


def test_trans_rejects_wrong_line_length_and_block_size():
    with pytest.raises(PreconditionError):
        trans(line_graph(9), chunked_line_strategy(4, 2), 3)
    with pytest.raises(InvalidParameterError):
        trans(line_graph(9), chunked_line_strategy(4, 2), 0)


@given(st.integers(1, 60), st.data())
def test_trans_on_lines_scales_space_by_block(n, data):
    b = data.draw(st.integers(1, n))
    m = -(-n // b)
    p = chunked_line_strategy(m, data.draw(st.integers(1, m)))
    tr = trans(line_graph(n), p, b)
    assert verify(tr, line_graph(n)) == []
    assert cost(tr).space <= b * cost(p).space


@settings(max_examples=80)
@given(forward_dags(min_n=2, max_n=60), st.data())
def test_trans_bounds_on_random_dags(g, data):
    b = data.draw(st.integers(1, g.n))
    m = -(-g.n // b)
    p = chunked_line_strategy(m, data.draw(st.integers(1, m)))
    tr = trans(g, p, b)
    assert verify(tr.with_target({g.n}), g) == []
    c = cost(tr)
    assert c.space_time <= trans_st_bound(b, cost(p), num_skip(g, b))
    assert c.time <= b * (p.t + 1)


@pytest.mark.parametrize("seed", range(3))
def test_trans_on_drsample_4096(seed):
    n = 2**12
    g = sample_drsample(n, seed)
    b = math.ceil(n / math.log2(n) ** 2)
    m = -(-n // b)
    p = recursive_line_strategy(m, best_line_plan(m))
    tr = trans(g, p, b)
    assert verify(tr, g) == []
    assert cost(tr).space_time <= trans_st_bound(b, cost(p), num_skip(g, b))


# ---------------------------------------------------------------------------
# DRSample attack


def test_drsample_attack_legal_and_beats_naive():
    n = 2**12
    g = sample_drsample(n, 0)
    tr, c = drsample_attack(g)
    assert verify(tr, g) == []
    assert c.space_time <= 2 * n * n
    assert c == cost(tr)


def test_drsample_attack_deterministic():
    a = drsample_attack(sample_drsample(2**10, 42))[1]
    b = drsample_attack(sample_drsample(2**10, 42))[1]
    assert a == b


def test_drsample_attack_scaling_constant():
    # st / (N^2 loglogN / logN) should stay flat as N grows
    means = []
    for e in range(12, 17):
        n = 2**e
        norm = n * n * math.log2(math.log2(n)) / math.log2(n)
        ratios = [drsample_attack(sample_drsample(n, s))[1].space_time / norm for s in range(20)]
        means.append(statistics.mean(ratios))
    assert max(means) <= 1.25 * min(means)
    assert max(means) < 4
