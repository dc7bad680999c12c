"""DAGs on nodes 1..N, graph-family samplers, depth queries and block plans.

Every DAG here is labelled so that the identity order 1..N is topological:
each edge (u, v) has u < v.  Formulas that index by prefixes of the node set
or by consecutive blocks depend on this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidParameterError, ParseError

DAG_HEADER = "pebble-dag v1"

FAMILIES = (
    "line",
    "argon2i_a",
    "argon2i_b",
    "drsample",
    "fixed_example_ed",
    "fixed_example_trans",
)

# stream tags so that different families never share a random stream
_FAMILY_TAG = {"argon2i_a": 1, "argon2i_b": 2, "drsample": 3}

# seed for the 18-node Trans fixture graph
TRANS_FIXTURE_SEED = 18


@dataclass(frozen=True)
class Dag:
    """Immutable forward-labelled DAG.

    ``parents[v]`` is the sorted tuple of parents of node ``v``; index 0 is an
    unused placeholder so node ids can be used directly.
    """

    n: int
    parents: tuple

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("a DAG needs at least one node")
        if len(self.parents) != self.n + 1:
            raise InvalidParameterError("parents must have length n + 1")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        if n < 1:
            raise InvalidParameterError("a DAG needs at least one node")
        plists: list[set[int]] = [set() for _ in range(n + 1)]
        for u, v in edges:
            if not (1 <= u < v <= n):
                raise InvalidParameterError(f"edge ({u},{v}) is not forward within [1,{n}]")
            if u in plists[v]:
                raise InvalidParameterError(f"duplicate edge ({u},{v})")
            plists[v].add(u)
        return cls(n, tuple(tuple(sorted(p)) for p in plists))

    @cached_property
    def children(self) -> tuple:
        kids: list[list[int]] = [[] for _ in range(self.n + 1)]
        for v in range(1, self.n + 1):
            for u in self.parents[v]:
                kids[u].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def edges(self) -> frozenset:
        return frozenset((u, v) for v in range(1, self.n + 1) for u in self.parents[v])

    @property
    def num_edges(self) -> int:
        return sum(len(p) for p in self.parents)

    @cached_property
    def sinks(self) -> frozenset:
        return frozenset(v for v in range(1, self.n + 1) if not self.children[v])

    def indeg(self, v: int | None = None) -> int:
        """In-degree of ``v``, or the maximum in-degree when ``v`` is None."""
        if v is not None:
            return len(self.parents[v])
        return max(len(p) for p in self.parents)

    def nodes(self) -> range:
        return range(1, self.n + 1)


@dataclass(frozen=True)
class BlockPlan:
    """Partition of [N] into consecutive blocks of size b and their skip nodes."""

    b: int
    blocks: tuple  # tuple of ranges, block i (1-based) at index i-1
    skip_sets: tuple  # tuple of frozensets aligned with blocks
    num_skip: int

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_of(self, v: int) -> int:
        """1-based block index containing node ``v``."""
        return (v - 1) // self.b + 1


@dataclass(frozen=True)
class GraphFamilySpec:
    family: str
    n: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}")

    def build(self) -> Dag:
        return make_graph(self.family, self.n, self.seed)


# ---------------------------------------------------------------------------
# families


def line_graph(n: int) -> Dag:
    if n < 1:
        raise InvalidParameterError("line graph needs n >= 1")
    parents = [()] * (n + 1)
    for v in range(2, n + 1):
        parents[v] = (v - 1,)
    return Dag(n, tuple(parents))


def _uniforms(seed: int, family: str, n: int, draws: int = 1) -> np.ndarray:
    """``draws`` x (n+1) uniforms on [0, 1); column v belongs to node v."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, _FAMILY_TAG[family]])
    rng = np.random.Generator(np.random.PCG64(ss))
    return rng.random((draws, n + 1))


def _skeleton_with(n: int, r: np.ndarray) -> Dag:
    # r[v] is the random parent of v for v >= 3 (ignored below 3)
    parents = [()] * (n + 1)
    if n >= 2:
        parents[2] = (1,)
    rl = r.tolist()
    for v in range(3, n + 1):
        parents[v] = (int(rl[v]), v - 1)
    return Dag(n, tuple(parents))


def _check_sampler_n(n: int) -> None:
    if n < 2:
        raise InvalidParameterError("samplers require n >= 2")


def argon2i_a_parents(i: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Random parent of node ``i`` (>= 3): uniform on [1, i-2], driven by ``u``."""
    return 1 + np.floor(u * (i - 2)).astype(np.int64)


def argon2i_b_parents(i: np.ndarray, u: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Random parent under Pr[r(i)=j] = sqrt(1-(j-1)/i) - sqrt(1-j/i).

    Inverse-CDF draw: j = ceil(i * (1 - x^2)) for x uniform, which lands in
    (j-1, j] with exactly the stated probability.  With ``clamp`` the result
    is forced into [1, max(1, i-2)] so it never duplicates the path edge.
    """
    i = np.asarray(i, dtype=np.float64)
    x = 1.0 - np.asarray(u, dtype=np.float64)  # (0, 1]
    j = np.ceil(i * (1.0 - x * x)).astype(np.int64)
    j = np.maximum(j, 1)
    if clamp:
        j = np.minimum(j, np.maximum(1, i.astype(np.int64) - 2))
    return j


def argon2i_b_pmf(i: int, j: int) -> float:
    """Unclamped Pr[r(i) = j]."""
    return math.sqrt(1 - (j - 1) / i) - math.sqrt(1 - j / i)


def drsample_parents(v: np.ndarray, u_bucket: np.ndarray, u_offset: np.ndarray) -> np.ndarray:
    """DRSample random parent of node ``v`` (>= 3).

    Bucket index i is uniform on {1, ..., floor(log2(v-1))}; the edge length
    v - r is then uniform on (2^(i-1), 2^i] intersected with [2, v-1].
    """
    v = np.asarray(v, dtype=np.int64)
    _, e = np.frexp((v - 1).astype(np.float64))
    nbuckets = e - 1  # floor(log2(v-1)), exact via frexp
    bucket = 1 + np.floor(u_bucket * nbuckets).astype(np.int64)
    lo = (1 << (bucket - 1)) + 1
    hi = np.minimum(1 << bucket, v - 1)
    # lo <= hi always holds because 2^(i-1) < v-1 when i <= floor(log2(v-1))
    length = lo + np.floor(u_offset * (hi - lo + 1)).astype(np.int64)
    return v - length


def sample_argon2i_a(n: int, seed: int) -> Dag:
    _check_sampler_n(n)
    u = _uniforms(seed, "argon2i_a", n)[0]
    idx = np.arange(n + 1)
    r = np.zeros(n + 1, dtype=np.int64)
    if n >= 3:
        r[3:] = argon2i_a_parents(idx[3:], u[3:])
    return _skeleton_with(n, r)


def sample_argon2i_b(n: int, seed: int) -> Dag:
    _check_sampler_n(n)
    u = _uniforms(seed, "argon2i_b", n)[0]
    idx = np.arange(n + 1)
    r = np.zeros(n + 1, dtype=np.int64)
    if n >= 3:
        r[3:] = argon2i_b_parents(idx[3:], u[3:])
    return _skeleton_with(n, r)


def sample_drsample(n: int, seed: int) -> Dag:
    _check_sampler_n(n)
    u = _uniforms(seed, "drsample", n, draws=2)
    idx = np.arange(n + 1)
    r = np.zeros(n + 1, dtype=np.int64)
    if n >= 3:
        r[3:] = drsample_parents(idx[3:], u[0, 3:], u[1, 3:])
    return _skeleton_with(n, r)


def fixed_example_ed() -> Dag:
    """16-node graph that is (4,3)-reducible via S = {1, 5, 9, 13}."""
    edges = [(i, i + 1) for i in range(1, 16)]
    for i in range(1, 4):
        base = 4 * (i - 1) + 1
        edges += [(base, base + off) for off in (2, 3, 4, 5)]
    edges += [(13, 15), (13, 16)]
    return Dag.from_edges(16, edges)


def fixed_example_trans() -> Dag:
    """18-node stand-in for the induced-line-graph example (seeded DRSample)."""
    return sample_drsample(18, TRANS_FIXTURE_SEED)


def make_graph(family: str, n: int = 0, seed: int = 0) -> Dag:
    if family == "line":
        return line_graph(n)
    if family == "argon2i_a":
        return sample_argon2i_a(n, seed)
    if family == "argon2i_b":
        return sample_argon2i_b(n, seed)
    if family == "drsample":
        return sample_drsample(n, seed)
    if family == "fixed_example_ed":
        return fixed_example_ed()
    if family == "fixed_example_trans":
        return fixed_example_trans()
    raise InvalidParameterError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# structural queries


def longest_path_to(g: Dag, w: int, removed=frozenset()) -> dict[int, int]:
    """Number of nodes on the longest path from each ancestor of ``w`` to ``w``.

    Paths live in ``g - removed``; ``w`` itself is always kept and maps to 1.
    Nodes that cannot reach ``w`` are absent from the result.
    """
    if not 1 <= w <= g.n:
        raise InvalidParameterError(f"node {w} out of range [1,{g.n}]")
    anc = {w}
    stack = [w]
    parents = g.parents
    while stack:
        x = stack.pop()
        for p in parents[x]:
            if p not in anc and p not in removed:
                anc.add(p)
                stack.append(p)
    dist = {w: 1}
    children = g.children
    for v in sorted(anc, reverse=True):
        if v == w:
            continue
        dist[v] = 1 + max(dist[c] for c in children[v] if c in dist)
    return dist


def _depth_table(g: Dag, removed) -> list[int]:
    length = [0] * (g.n + 1)
    parents = g.parents
    for v in range(1, g.n + 1):
        if v in removed:
            continue
        best = 0
        for p in parents[v]:
            if length[p] > best:
                best = length[p]
        length[v] = best + 1
    return length


def depth(g: Dag, removed=frozenset()) -> int:
    """Number of nodes on the longest directed path of ``g - removed``."""
    return max(_depth_table(g, removed))


def longest_path(g: Dag, removed=frozenset()) -> list[int]:
    """One longest path of ``g - removed`` as a node list (empty if all removed)."""
    length = _depth_table(g, removed)
    end = max(range(g.n + 1), key=lambda v: (length[v], -v))
    if length[end] == 0:
        return []
    path = [end]
    while length[path[-1]] > 1:
        v = path[-1]
        path.append(next(p for p in g.parents[v] if length[p] == length[v] - 1 and p not in removed))
    path.reverse()
    return path


def block_plan(g: Dag, b: int) -> BlockPlan:
    if not 1 <= b <= g.n:
        raise InvalidParameterError(f"block size {b} outside [1,{g.n}]")
    nblocks = -(-g.n // b)
    blocks = tuple(range(i * b + 1, min((i + 1) * b, g.n) + 1) for i in range(nblocks))
    skips: list[set[int]] = [set() for _ in range(nblocks)]
    for v in range(1, g.n + 1):
        bv = (v - 1) // b
        for u in g.parents[v]:
            bu = (u - 1) // b
            if bv > bu + 1:
                skips[bu].add(u)
    skip_sets = tuple(frozenset(s) for s in skips)
    return BlockPlan(b, blocks, skip_sets, sum(len(s) for s in skip_sets))


def num_skip(g: Dag, b: int) -> int:
    return block_plan(g, b).num_skip


def drsample_block_size(n: int) -> int:
    """b = ceil(N / log2(N)^2), at least 1."""
    if n < 2:
        return 1
    return max(1, math.ceil(n / math.log2(n) ** 2))


# ---------------------------------------------------------------------------
# edge-list files


def format_dag(g: Dag) -> str:
    lines = [f"{DAG_HEADER} {g.n}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def write_dag(g: Dag, path) -> None:
    Path(path).write_text(format_dag(g), encoding="ascii", newline="\n")


def parse_dag(text: str) -> Dag:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 3 or " ".join(head[:2]) != DAG_HEADER:
        raise ParseError(f"expected header '{DAG_HEADER} <N>'", 1)
    try:
        n = int(head[2])
    except ValueError:
        raise ParseError("node count is not an integer", 1) from None
    if n < 1:
        raise ParseError("node count must be positive", 1)
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected two node ids", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("node id is not an integer", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"node id out of range [1,{n}]", lineno)
        if u >= v:
            raise ParseError("edge not forward", lineno)
        if (u, v) in seen:
            raise ParseError("duplicate edge", lineno)
        seen.add((u, v))
    return Dag.from_edges(n, seen)


def read_dag(path) -> Dag:
    return parse_dag(Path(path).read_text(encoding="ascii"))
