"""Exhaustive optimal pebbling search on small graphs.

Configurations are bitmasks (bit v-1 for node v).  The move generator is
written independently of ``engine.verify`` so the two can cross-check.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator

from .engine import PebbleTrace
from .errors import InvalidParameterError
from .graph import Dag

MAX_NODES = 24
OBJECTIVES = ("min_time_at_cap", "min_space_time", "min_cc")


@dataclass(frozen=True)
class SearchSpec:
    g: Dag
    target: frozenset
    space_cap: int
    objective: str = "min_time_at_cap"
    model: str = "quantum"

    def __post_init__(self):
        if self.g.n > MAX_NODES:
            raise InvalidParameterError(f"oracle refuses graphs above {MAX_NODES} nodes (got {self.g.n})")
        if not 0 <= self.space_cap <= self.g.n:
            raise InvalidParameterError(f"space cap {self.space_cap} outside [0,{self.g.n}]")
        if self.objective not in OBJECTIVES:
            raise InvalidParameterError(f"unknown objective {self.objective!r}")
        if self.model not in ("quantum", "classical"):
            raise InvalidParameterError(f"unknown model {self.model!r}")
        if any(not 1 <= v <= self.g.n for v in self.target):
            raise InvalidParameterError("target node out of range")


@dataclass(frozen=True)
class SearchResult:
    value: int | None  # rounds, or cumulative cost for min_cc; None if unreachable
    witness: PebbleTrace | None

    @property
    def reachable(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class SpaceTimeOptimum:
    space: int
    time: int
    space_time: int
    witness: PebbleTrace


def to_mask(nodes) -> int:
    m = 0
    for v in nodes:
        m |= 1 << (v - 1)
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def parent_masks(g: Dag) -> list[int]:
    return [0] + [to_mask(g.parents[v]) for v in range(1, g.n + 1)]


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return out


def successors(state: int, pmask: list[int], n: int, cap: int, model: str = "quantum") -> Iterator[int]:
    """All configurations reachable from ``state`` in one legal round (self-loop excluded)."""
    ready = 0  # nodes whose parents are all pebbled
    for v in range(1, n + 1):
        if pmask[v] & ~state == 0:
            ready |= 1 << (v - 1)
    addable = ready & ~state
    size = state.bit_count()
    if model == "classical":
        for rem in _submasks(state):
            room = cap - size + rem.bit_count()
            if room < 0:
                continue
            for add in _submasks(addable):
                if add.bit_count() <= room and (add or rem):
                    yield (state & ~rem) | add
        return
    deletable = ready & state
    for rem in _submasks(deletable):
        # a removed node may not be a parent of anything changed this round
        rem_nodes = _bits(rem)
        if any(pmask[v] & rem for v in rem_nodes):
            continue
        room = cap - size + len(rem_nodes)
        if room < 0:
            continue
        free = 0
        for v in _bits(addable):
            if pmask[v] & rem == 0:
                free |= 1 << (v - 1)
        for add in _submasks(free):
            if add.bit_count() <= room and (add or rem):
                yield (state & ~rem) | add


def _trace(spec: SearchSpec, path: list[int]) -> PebbleTrace:
    return PebbleTrace.from_configs(spec.g.n, [from_mask(m) for m in path], spec.target)


def _unwind(prev: dict[int, int], goal: int) -> list[int]:
    path = [goal]
    while path[-1] != 0:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def optimal_time(spec: SearchSpec) -> SearchResult:
    """Fewest rounds from the empty configuration to exactly the target under the cap."""
    if spec.objective == "min_cc":
        return optimal_cumulative(spec)
    g = spec.g
    pm = parent_masks(g)
    goal = to_mask(spec.target)
    if len(spec.target) > spec.space_cap:
        return SearchResult(None, None)
    prev = {0: 0}
    frontier = [0]
    t = 0
    if goal == 0:
        return SearchResult(0, _trace(spec, [0]))
    while frontier:
        t += 1
        nxt = set()
        for state in frontier:
            for q in successors(state, pm, g.n, spec.space_cap, spec.model):
                if q not in prev:
                    prev[q] = state
                    nxt.add(q)
        if goal in nxt:
            return SearchResult(t, _trace(spec, _unwind(prev, goal)))
        frontier = sorted(nxt)
    return SearchResult(None, None)


def optimal_cumulative(spec: SearchSpec) -> SearchResult:
    """Smallest sum of |P_i| over i in [t] (Dijkstra; each round costs |P_i|)."""
    g = spec.g
    pm = parent_masks(g)
    goal = to_mask(spec.target)
    if goal == 0:
        return SearchResult(0, _trace(spec, [0]))
    best = {0: 0}
    prev: dict[int, int] = {}
    heap = [(0, 0)]
    while heap:
        c, state = heapq.heappop(heap)
        if c > best[state]:
            continue
        if state == goal:
            return SearchResult(c, _trace(spec, _unwind(prev, goal)))
        for q in successors(state, pm, g.n, spec.space_cap, spec.model):
            nc = c + q.bit_count()
            if nc < best.get(q, nc + 1):
                best[q] = nc
                prev[q] = state
                heapq.heappush(heap, (nc, q))
    return SearchResult(None, None)


def optimal_space_time(g: Dag, target=None, model: str = "quantum") -> SpaceTimeOptimum:
    """min over caps s of s * t_min(s); ties go to the smaller cap."""
    target = frozenset(g.sinks if target is None else target)
    best = None
    for s in range(max(1, len(target)), g.n + 1):
        if best is not None and s > best.space_time:
            break
        res = optimal_time(SearchSpec(g, target, s, model=model))
        if res.reachable and (best is None or s * res.value < best.space_time):
            best = SpaceTimeOptimum(s, res.value, s * res.value, res.witness)
    if best is None:
        raise InvalidParameterError("target is unreachable at every space cap")
    return best
