"""Pebbling traces, legality checking and cost metrics.

A trace P_0, ..., P_t always starts from the empty configuration.  It is
stored as one (added, removed) pair per round, so long traces whose
configurations are large but change slowly stay cheap; ``configs()``
rebuilds the configurations on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvalidTraceError, ParseError
from .graph import Dag

TRACE_HEADER = "pebble-trace v1"

ENDS_NOT_TARGET = "ends_not_target"
ILLEGAL_ADD = "illegal_add"
ILLEGAL_DELETE = "illegal_delete"
REVERSIBILITY = "reversibility"
SEQUENTIAL_STEP = "sequential_step"

CONDITION_NUMBER = {
    ENDS_NOT_TARGET: 1,
    ILLEGAL_ADD: 2,
    ILLEGAL_DELETE: 3,
    REVERSIBILITY: 4,
    SEQUENTIAL_STEP: 5,
}


@dataclass(frozen=True)
class LegalityRegime:
    model: str = "quantum"  # or "classical"
    schedule: str = "parallel"  # or "sequential"
    relaxed: bool = False

    def __post_init__(self):
        if self.model not in ("quantum", "classical"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.schedule not in ("parallel", "sequential"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    @property
    def quantum(self) -> bool:
        return self.model == "quantum"

    @property
    def sequential(self) -> bool:
        return self.schedule == "sequential"


QUANTUM_PARALLEL = LegalityRegime("quantum", "parallel")
QUANTUM_SEQUENTIAL = LegalityRegime("quantum", "sequential")
CLASSICAL_PARALLEL = LegalityRegime("classical", "parallel")
CLASSICAL_SEQUENTIAL = LegalityRegime("classical", "sequential")


@dataclass(frozen=True)
class Violation:
    round: int
    condition: str
    witness: frozenset

    @property
    def number(self) -> int:
        return CONDITION_NUMBER[self.condition]

    def __str__(self):
        nodes = " ".join(map(str, sorted(self.witness)))
        return f"round {self.round}: condition ({self.number}) {self.condition}: {{{nodes}}}"


@dataclass(frozen=True)
class CostReport:
    time: int
    space: int
    space_time: int
    cumulative: int

    def __str__(self):
        return f"t={self.time} s={self.space} st={self.space_time} cc={self.cumulative}"


@dataclass(frozen=True)
class PebbleTrace:
    """Sequence of configurations over a graph on nodes 1..n.

    ``steps[i-1]`` is the pair (added, removed) taking P_{i-1} to P_i.
    """

    n: int
    target: frozenset
    steps: tuple = field(repr=False)

    @classmethod
    def from_configs(cls, n: int, configs: Iterable[Iterable[int]], target: Iterable[int]) -> "PebbleTrace":
        it = iter(configs)
        first = frozenset(next(it, ()))
        if first:
            raise InvalidTraceError("P_0 must be empty")
        steps = []
        prev = first
        for c in it:
            cur = frozenset(c)
            steps.append((cur - prev, prev - cur))
            prev = cur
        return cls(n, frozenset(target), tuple(steps))

    @classmethod
    def from_steps(cls, n: int, steps: Iterable[tuple[Iterable[int], Iterable[int]]], target: Iterable[int]) -> "PebbleTrace":
        return cls(n, frozenset(target), tuple((frozenset(a), frozenset(d)) for a, d in steps))

    @property
    def t(self) -> int:
        return len(self.steps)

    def configs(self) -> Iterator[frozenset]:
        cur: set[int] = set()
        yield frozenset()
        for added, removed in self.steps:
            cur -= removed
            cur |= added
            yield frozenset(cur)

    def config_list(self) -> list[frozenset]:
        return list(self.configs())

    def final(self) -> frozenset:
        cur: set[int] = set()
        for added, removed in self.steps:
            cur -= removed
            cur |= added
        return frozenset(cur)

    def with_target(self, target: Iterable[int]) -> "PebbleTrace":
        return PebbleTrace(self.n, frozenset(target), self.steps)


# ---------------------------------------------------------------------------
# legality


def check_transition(g: Dag, prev, cur, regime: LegalityRegime = QUANTUM_PARALLEL, round_index: int = 1) -> list[Violation]:
    """Violations of conditions (2)-(5) for the single step prev -> cur."""
    prev = frozenset(prev)
    cur = frozenset(cur)
    added, removed = cur - prev, prev - cur
    out = _before_step(g, prev, added, removed, regime, round_index)
    out += _after_step(g, cur, added, removed, regime, round_index)
    return out


def _before_step(g, prev, added, removed, regime, i):
    # conditions (2) and (3) look at P_{i-1}
    out = []
    parents = g.parents
    bad_add = frozenset(x for x in added if any(p not in prev for p in parents[x]))
    if bad_add:
        out.append(Violation(i, ILLEGAL_ADD, bad_add))
    if regime.quantum:
        bad_del = frozenset(x for x in removed if any(p not in prev for p in parents[x]))
        if bad_del:
            out.append(Violation(i, ILLEGAL_DELETE, bad_del))
    return out


def _after_step(g, cur, added, removed, regime, i):
    # condition (4) looks at P_i; (5) only at the step size
    out = []
    if regime.quantum:
        parents = g.parents
        missing = frozenset(p for x in (added | removed) for p in parents[x] if p not in cur)
        if missing:
            out.append(Violation(i, REVERSIBILITY, missing))
    if regime.sequential and len(added) + len(removed) > 1:
        out.append(Violation(i, SEQUENTIAL_STEP, frozenset(added | removed)))
    return out


def _check_nodes(trace: PebbleTrace, g: Dag) -> None:
    if trace.n != g.n:
        raise InvalidTraceError(f"trace is over {trace.n} nodes but graph has {g.n}")
    for x in trace.target:
        if not 1 <= x <= g.n:
            raise InvalidTraceError(f"target node {x} out of range")
    for i, (added, removed) in enumerate(trace.steps, start=1):
        for x in added | removed:
            if not 1 <= x <= g.n:
                raise InvalidTraceError(f"round {i}: node {x} out of range")
        if added & removed:
            raise InvalidTraceError(f"round {i}: node both added and removed")


def verify(trace: PebbleTrace, g: Dag, regime: LegalityRegime = QUANTUM_PARALLEL) -> list[Violation]:
    """All legality violations of ``trace`` on ``g``, ordered by round.

    An empty list means the trace is legal under ``regime``.
    """
    _check_nodes(trace, g)
    out: list[Violation] = []
    cur: set[int] = set()
    for i, (added, removed) in enumerate(trace.steps, start=1):
        if not removed <= cur or added & cur:
            raise InvalidTraceError(f"round {i}: step inconsistent with P_{i - 1}")
        out.extend(_before_step(g, cur, added, removed, regime, i))
        cur -= removed
        cur |= added
        out.extend(_after_step(g, cur, added, removed, regime, i))
    final = frozenset(cur)
    target = trace.target
    if regime.relaxed:
        if not target <= final:
            out.append(Violation(trace.t, ENDS_NOT_TARGET, target - final))
    elif final != target:
        out.append(Violation(trace.t, ENDS_NOT_TARGET, final ^ target))
    return out


def is_legal(trace: PebbleTrace, g: Dag, regime: LegalityRegime = QUANTUM_PARALLEL) -> bool:
    return not verify(trace, g, regime)


# ---------------------------------------------------------------------------
# costs


def cost(trace: PebbleTrace) -> CostReport:
    size = 0
    space = 0
    cc = 0
    for added, removed in trace.steps:
        size += len(added) - len(removed)
        cc += size
        if size > space:
            space = size
    return CostReport(trace.t, space, trace.t * space, cc)


def cost_from_sizes(sizes: Iterable[int]) -> CostReport:
    """Cost of a trace given |P_1|, ..., |P_t| (streaming accounting)."""
    t = space = cc = 0
    for s in sizes:
        t += 1
        cc += s
        if s > space:
            space = s
    return CostReport(t, space, t * space, cc)


# ---------------------------------------------------------------------------
# constructions


def reverse_closure(trace: PebbleTrace, sinks: Iterable[int] | None = None) -> PebbleTrace:
    """Append the time-reversed prefix so the trace ends on exactly ``sinks``.

    With P_t containing the sinks, rounds t+j become P_{t-j} with the sinks
    added, for j = 1..t.  A first mirrored round identical to P_t is dropped.
    ``sinks`` defaults to the trace's target.
    """
    sinks = frozenset(trace.target if sinks is None else sinks)
    configs = trace.config_list()
    last = configs[-1]
    if not sinks <= last:
        raise InvalidTraceError("reverse_closure needs every sink pebbled in the final configuration")
    if last == sinks:
        return PebbleTrace(trace.n, sinks, trace.steps)
    mirrored = [configs[trace.t - j] | sinks for j in range(1, trace.t + 1)]
    if mirrored and mirrored[0] == last:
        mirrored = mirrored[1:]
    return PebbleTrace.from_configs(trace.n, configs + mirrored, sinks)


# ---------------------------------------------------------------------------
# trace files


def format_trace(trace: PebbleTrace) -> str:
    lines = [f"{TRACE_HEADER} {trace.n} {trace.t}"]
    lines += [" ".join(map(str, sorted(c))) for c in trace.configs()]
    lines.append("target: " + " ".join(map(str, sorted(trace.target))))
    return "\n".join(lines) + "\n"


def write_trace(trace: PebbleTrace, path) -> None:
    Path(path).write_text(format_trace(trace), encoding="ascii", newline="\n")


def _ids(text: str, lineno: int) -> list[int]:
    try:
        return [int(x) for x in text.split()]
    except ValueError:
        raise ParseError("node id is not an integer", lineno) from None


def parse_trace(text: str) -> PebbleTrace:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 4 or " ".join(head[:2]) != TRACE_HEADER:
        raise ParseError(f"expected header '{TRACE_HEADER} <N> <t>'", 1)
    try:
        n, t = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError("N and t must be integers", 1) from None
    if len(lines) != t + 3:
        raise ParseError(f"expected {t + 1} configuration lines and a target line", len(lines))
    configs = []
    for k in range(t + 1):
        lineno = k + 2
        ids = _ids(lines[k + 1], lineno)
        if ids != sorted(set(ids)):
            raise ParseError("configuration must list distinct ids in ascending order", lineno)
        if any(not 1 <= x <= n for x in ids):
            raise ParseError(f"node id out of range [1,{n}]", lineno)
        configs.append(ids)
    if configs[0]:
        raise ParseError("P_0 must be empty", 2)
    tail = lines[-1]
    if not tail.startswith("target:"):
        raise ParseError("expected 'target:' line", len(lines))
    target = _ids(tail[len("target:"):], len(lines))
    return PebbleTrace.from_configs(n, configs, target)


def read_trace(path) -> PebbleTrace:
    return parse_trace(Path(path).read_text(encoding="ascii"))
