"""Constructive parallel quantum pebbling strategies.

All strategies emit traces step by step as (added, removed) pairs; the line
strategies are also exposed as generators so large instances can be costed
without materialising the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .engine import QUANTUM_PARALLEL, CostReport, PebbleTrace, cost, cost_from_sizes, verify
from .errors import InvalidParameterError, PreconditionError
from .graph import Dag, block_plan, depth, drsample_block_size, line_graph, longest_path, longest_path_to

Step = tuple  # (added, removed), each a tuple of node ids


# ---------------------------------------------------------------------------
# naive


def naive_strategy(g: Dag) -> PebbleTrace:
    """Pebble 1..N in order, then unpebble non-sinks in reverse order."""
    steps = [((v,), ()) for v in g.nodes()]
    steps += [((), (v,)) for v in range(g.n - 1, 0, -1) if v not in g.sinks]
    return PebbleTrace.from_steps(g.n, steps, g.sinks)


# ---------------------------------------------------------------------------
# line graphs


@dataclass(frozen=True)
class RecursionPlan:
    """Per-level branching factors for the recursive line strategy.

    Level 0 is outermost.  At level l a segment is cut into consecutive
    chunks of length prod(factors[l+1:]) (the final chunk may be shorter).
    One factor means the naive pebbling; two factors mean the pipelined
    chunked strategy with chunk length factors[1]; each further level runs
    the inner strategy on its chunks one after another and then mirrors.
    """

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InvalidParameterError("a recursion plan needs at least one level")
        if any(int(f) != f or f < 2 for f in self.factors):
            raise InvalidParameterError("every factor must be an integer >= 2")

    @classmethod
    def uniform(cls, k: int, c: int) -> "RecursionPlan":
        return cls((k,) * c)

    @classmethod
    def for_levels(cls, n: int, levels: int) -> "RecursionPlan":
        """``levels`` equal factors k = ceil(n^(1/levels)), at least 2."""
        if levels < 1:
            raise InvalidParameterError("levels must be >= 1")
        k = max(2, math.ceil(n ** (1.0 / levels)))
        # float roots can land one off in either direction
        while k > 2 and (k - 1) ** levels >= n:
            k -= 1
        while k ** levels < n:
            k += 1
        return cls((k,) * levels)

    @property
    def levels(self) -> int:
        return len(self.factors)

    def capacity(self) -> int:
        return math.prod(self.factors)

    def check(self, n: int) -> None:
        if self.capacity() < n:
            raise InvalidParameterError(f"plan {self.factors} covers only {self.capacity()} < {n} nodes")


def _naive_line_steps(m: int, off: int) -> Iterator[Step]:
    for i in range(1, m + 1):
        yield (off + i,), ()
    for j in range(1, m):
        yield (), (off + m - j,)


def _chunked_forward(m: int, k: int, off: int) -> list[Step]:
    # rounds 1..m-1: add node i while clearing the previous chunk top-down,
    # keeping each chunk's last node
    steps = []
    for i in range(1, m):
        j, pos = divmod(i - 1, k)
        pos += 1
        if j >= 1 and pos <= k - 1:
            steps.append(((off + i,), (off + j * k - pos,)))
        else:
            steps.append(((off + i,), ()))
    return steps


def _chunked_line_steps(m: int, k: int, off: int) -> Iterator[Step]:
    k = min(k, m)
    fwd = _chunked_forward(m, k, off)
    yield from fwd
    yield (off + m,), ()
    for added, removed in reversed(fwd):
        yield removed, added


def _clean_steps(m: int, factors: tuple, off: int = 0) -> Iterator[Step]:
    """Steps of a trace taking L_m (shifted by ``off``) from empty to {m}."""
    if m <= 0:
        return
    if len(factors) == 1:
        yield from _naive_line_steps(m, off)
        return
    if len(factors) == 2:
        yield from _chunked_line_steps(m, factors[1], off)
        return
    inner = factors[1:]
    size = math.prod(inner)
    if size >= m:
        yield from _clean_steps(m, inner, off)
        return
    q = -(-m // size)
    lengths = [min(size, m - j * size) for j in range(q)]
    for j, length in enumerate(lengths):
        yield from _clean_steps(length, inner, off + j * size)
    # mirror every chunk but the last; m itself stays put
    for j in range(q - 2, -1, -1):
        sub = list(_clean_steps(lengths[j], inner, off + j * size))
        for added, removed in reversed(sub):
            yield removed, added


def line_steps(n: int, plan: RecursionPlan) -> Iterator[Step]:
    plan.check(n)
    return _clean_steps(n, plan.factors)


def chunked_line_strategy(n: int, k: int) -> PebbleTrace:
    """Chunked two-phase strategy on L_n with chunks of ``k`` nodes."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not 1 <= k <= n:
        raise InvalidParameterError(f"chunk size {k} outside [1,{n}]")
    return PebbleTrace.from_steps(n, _chunked_line_steps(n, k, 0), {n})


def recursive_line_strategy(n: int, plan: RecursionPlan) -> PebbleTrace:
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return PebbleTrace.from_steps(n, line_steps(n, plan), {n})


@dataclass(frozen=True)
class _LineStats:
    time: int
    space: int
    cc: int
    space_before_last: int  # max |P_r| over r < t


@lru_cache(maxsize=None)
def _line_stats(m: int, factors: tuple) -> _LineStats:
    if m <= 0:
        return _LineStats(0, 0, 0, 0)
    if len(factors) <= 2:
        size = t = space = cc = 0
        before_last = 0
        for added, removed in _clean_steps(m, factors):
            before_last = space
            size += len(added) - len(removed)
            t += 1
            cc += size
            space = max(space, size)
        return _LineStats(t, space, cc, before_last)
    inner = factors[1:]
    size = math.prod(inner)
    if size >= m:
        return _line_stats(m, inner)
    q = -(-m // size)
    subs = [_line_stats(min(size, m - j * size), inner) for j in range(q)]
    t = cc = 0
    space = 0
    for j, s in enumerate(subs):
        # j earlier chunk endpoints are held while chunk j runs
        t += s.time
        cc += j * s.time + s.cc
        space = max(space, j + s.space)
    fwd_space = space
    for j in range(q - 2, -1, -1):
        s = subs[j]
        # configurations R_{T-1}..R_0 of the chunk plus j endpoints and m
        t += s.time
        cc += (j + 1) * s.time + s.cc - 1
        space = max(space, j + 1 + s.space_before_last)
    # the last configuration is {m}; everything before it is at least as big
    return _LineStats(t, space, cc, max(fwd_space, space) if t > 1 else 0)


def line_cost(n: int, plan: RecursionPlan) -> CostReport:
    """Exact cost of ``recursive_line_strategy(n, plan)`` without building it."""
    plan.check(n)
    s = _line_stats(n, tuple(plan.factors))
    return CostReport(s.time, s.space, s.time * s.space, s.cc)


def best_line_plan(n: int, max_levels: int = 8) -> RecursionPlan:
    """Plan with the smallest space-time cost among 1..max_levels levels."""
    best = None
    for levels in range(1, max_levels + 1):
        plan = RecursionPlan.for_levels(n, levels)
        st = line_cost(n, plan).space_time
        if best is None or st < best[0]:
            best = (st, plan)
    return best[1]


# ---------------------------------------------------------------------------
# (e, d)-reducible graphs


class _ATable:
    """Lazily computed A_{w,S,i} sets, keyed by w."""

    def __init__(self, g: Dag, S: frozenset, d: int):
        self.g = g
        self.S = S
        self.d = d
        self._cache: dict[int, dict[int, int]] = {}

    def dist(self, w: int) -> dict[int, int]:
        """LongestPath in G - S_{<=w-1} from each ancestor to w, capped at d+1."""
        if w not in self._cache:
            removed = {x for x in self.S if x < w}
            self._cache[w] = {x: i for x, i in longest_path_to(self.g, w, removed).items() if i <= self.d + 1}
        return self._cache[w]

    def layer(self, w: int, i: int) -> frozenset:
        if not 1 <= w <= self.g.n:
            return frozenset()
        return frozenset(x for x, li in self.dist(w).items() if li == i)

    def evict_below(self, w: int) -> None:
        for key in [k for k in self._cache if k < w]:
            del self._cache[key]


def ed_window(tables: _ATable, v: int) -> set[int]:
    """B_v: nodes x with LongestPath(x, w) >= |w - v| + 1 for w within d of v."""
    d = tables.d
    out: set[int] = set()
    for w in range(max(1, v - d), min(tables.g.n, v + d) + 1):
        need = abs(w - v) + 1
        out.update(x for x, i in tables.dist(w).items() if i >= need)
    return out


def ed_configs(g: Dag, S: Iterable[int], d: int) -> Iterator[frozenset]:
    """P_0..P_N of the forward half of the (e,d) strategy.

    Each sink is kept from the round it is first pebbled on, which changes
    nothing when N is the only sink.
    """
    S = frozenset(S)
    sinks = g.sinks
    tables = _ATable(g, S, d)
    yield frozenset()
    held: set[int] = set()
    for v in g.nodes():
        if v in S or v in sinks:
            held.add(v)
        yield frozenset(held | ed_window(tables, v))
        tables.evict_below(v - d)


def _check_depth(g: Dag, S: frozenset, d: int) -> None:
    if d < 0:
        raise InvalidParameterError("d must be >= 0")
    if depth(g, S) > d:
        witness = longest_path(g, S)
        raise PreconditionError(
            f"depth(G - S) = {len(witness)} > d = {d}; path {' -> '.join(map(str, witness))}"
        )


def ed_strategy(g: Dag, S: Iterable[int], d: int) -> PebbleTrace:
    """Pebbling P_0..P_{2N} with P_v = S_{<=v} ∪ B_v and a mirrored second half.

    Rounds N+j reuse P_{N-j} together with the sinks, so the trace ends on
    exactly sinks(G).
    """
    S = frozenset(S)
    _check_depth(g, S, d)
    n = g.n
    sinks = g.sinks
    fwd = list(ed_configs(g, S, d))
    configs = fwd + [fwd[2 * n - v] | sinks for v in range(n + 1, 2 * n + 1)]
    return PebbleTrace.from_configs(n, configs, sinks)


def ed_cost(g: Dag, S: Iterable[int], d: int) -> CostReport:
    """Cost of ``ed_strategy(g, S, d)`` without keeping its configurations."""
    S = frozenset(S)
    _check_depth(g, S, d)
    sinks = g.sinks
    fwd, mirrored = [], []
    for c in ed_configs(g, S, d):
        fwd.append(len(c))
        mirrored.append(len(c) + len(sinks - c))
    return cost_from_sizes(fwd[1:] + mirrored[-2::-1])


def ed_space_bound(e: int, d: int) -> int:
    return e + 8 * d * 2 ** d + 3


# ---------------------------------------------------------------------------
# induced line graph


def last_delete(p_prime: PebbleTrace, v: int) -> int:
    """Largest round index whose configuration contains ``v``."""
    found = None
    for i, c in enumerate(p_prime.configs()):
        if v in c:
            found = i
    if found is None:
        raise KeyError(f"node {v} is never pebbled")
    return found


def last_delete_table(p_prime: PebbleTrace) -> dict[int, int]:
    table: dict[int, int] = {}
    for i, c in enumerate(p_prime.configs()):
        for v in c:
            table[v] = i
    return table


def last_add(p_prime: PebbleTrace, node: int | None = None) -> int:
    """Round in which ``node`` (default: the last line node) is placed for the final time."""
    node = p_prime.n if node is None else node
    found = None
    prev = frozenset()
    for i, c in enumerate(p_prime.configs()):
        if i >= 1 and node not in prev:
            found = i
        prev = c
    if found is None:
        raise KeyError(f"node {node} is never placed")
    return found


@dataclass(frozen=True)
class TransSchedule:
    b: int
    num_blocks: int
    last_block_size: int
    last_delete: dict
    last_add: int
    rounds: int


def trans_schedule(n: int, p_prime: PebbleTrace, b: int) -> TransSchedule:
    m = -(-n // b)
    r = n - (m - 1) * b
    return TransSchedule(b, m, r, last_delete_table(p_prime), last_add(p_prime, m), p_prime.t * b + r - 1)


def trans(g: Dag, p_prime: PebbleTrace, b: int, check: bool = True) -> PebbleTrace:
    """Lift a pebbling of L_{ceil(N/b)} to a pebbling of ``g`` block by block.

    Placing a line node places its block one node per round; removing it
    clears the block in reverse order, keeping skip nodes until the block's
    final removal.  In the round where the last line node is placed for the
    final time, the last block is then stripped down to the sink N.
    The returned trace targets {N}.
    """
    n = g.n
    if not 1 <= b <= n:
        raise InvalidParameterError(f"block size {b} outside [1,{n}]")
    m = -(-n // b)
    if p_prime.n != m:
        raise PreconditionError(f"P' pebbles L_{p_prime.n}, expected L_{m}")
    if check:
        bad = verify(p_prime.with_target({m}), line_graph(m), QUANTUM_PARALLEL)
        if bad:
            raise PreconditionError(f"P' is not a legal pebbling of L_{m}: {bad[0]}")
    sched = trans_schedule(n, p_prime, b)
    r = sched.last_block_size
    skip = block_plan(g, b).skip_sets
    cur: set[int] = set()
    steps: list[Step] = []
    configs = p_prime.config_list()
    for j in range(1, p_prime.t + 1):
        placed = sorted(configs[j] - configs[j - 1])
        cleared = sorted(configs[j - 1] - configs[j])
        rounds = b + r - 1 if j == sched.last_add else b
        for k in range(1, rounds + 1):
            add: list[int] = []
            rem: list[int] = []
            for i in placed:
                size = b if i < m else r
                if k <= size:
                    x = (i - 1) * b + k
                    if x not in cur:
                        add.append(x)
            for i in cleared:
                if i < m:
                    if k <= b:
                        x = i * b - (k - 1)
                        final = j - 1 == sched.last_delete[i]
                        if (final or x not in skip[i - 1]) and x in cur:
                            rem.append(x)
                elif k <= r:
                    x = n - (k - 1)
                    if x in cur:
                        rem.append(x)
            if j == sched.last_add and k > b:
                x = n - (k - b)
                if x in cur:
                    rem.append(x)
            cur.difference_update(rem)
            cur.update(add)
            steps.append((tuple(add), tuple(rem)))
    return PebbleTrace.from_steps(n, steps, {n})


def trans_st_bound(b: int, line_cost_report: CostReport, numskip: int) -> int:
    return 2 * b * b * line_cost_report.space_time + 2 * b * line_cost_report.time * numskip


def drsample_attack(g: Dag, plan: RecursionPlan | None = None) -> tuple[PebbleTrace, CostReport]:
    """Trans over the cheapest recursive line pebbling with b = ceil(N / log^2 N)."""
    b = min(g.n, drsample_block_size(g.n))
    m = -(-g.n // b)
    if plan is None:
        plan = best_line_plan(m)
    p_prime = recursive_line_strategy(m, plan)
    trace = trans(g, p_prime, b, check=False)
    return trace, cost(trace)
