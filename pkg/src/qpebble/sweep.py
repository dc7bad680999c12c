"""Cost sweeps over line graphs and iMHF graph families, and Grover accounting."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

from .depth_reduction import corollary_params, reduce_layered
from .errors import InvalidParameterError
from .graph import depth, drsample_block_size, make_graph
from .strategies import RecursionPlan, best_line_plan, drsample_attack, ed_cost, line_cost

CSV_VERSION = "qpebble-sweep v1"
CSV_COLUMNS = ("n", "level", "time", "space", "st", "cc", "seed", "wall_ms")
LINE_MODELS = ("simulated", "analytic")


@dataclass(frozen=True)
class SweepRow:
    n: int
    level: int
    time: int | float
    space: int | float
    st: int | float
    cc: int | None
    seed: int = 0
    wall_ms: int = 0

    def csv(self) -> str:
        cells = [self.n, self.level, self.time, self.space, self.st, "" if self.cc is None else self.cc, self.seed, self.wall_ms]
        return ",".join(_cell(c) for c in cells)


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def thread_count() -> int:
    raw = os.environ.get("QPEBBLE_THREADS", "")
    if raw.strip():
        try:
            value = int(raw)
        except ValueError:
            raise InvalidParameterError(f"QPEBBLE_THREADS must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise InvalidParameterError("QPEBBLE_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


def _run_jobs(fn: Callable, jobs: list, threads: int | None) -> list:
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# ---------------------------------------------------------------------------
# line graphs


def line_plan_for_level(n: int, level: int) -> RecursionPlan:
    """Level 0 is the naive pebbling; level L >= 1 uses L equal branching factors."""
    if level < 0:
        raise InvalidParameterError("level must be >= 0")
    if level == 0:
        return RecursionPlan((max(2, n),))
    return RecursionPlan.for_levels(n, level)


def analytic_line_cost(n: int, level: int) -> tuple[float, float]:
    """(time, space) of the closed-form model: 2N and N at level 0, else 2^(L+1) N and L N^(1/L) + 1."""
    if level == 0:
        return 2.0 * n, float(n)
    return float(2 ** (level + 1) * n), level * n ** (1.0 / level) + 1


def _line_row(n: int, level: int, model: str, timing: bool) -> SweepRow:
    start = time.perf_counter()
    if model == "analytic":
        t, s = analytic_line_cost(n, level)
        row = SweepRow(n, level, t, s, t * s, None)
    else:
        c = line_cost(n, line_plan_for_level(n, level))
        row = SweepRow(n, level, c.time, c.space, c.space_time, c.cumulative)
    if timing:
        row = SweepRow(**{**row.__dict__, "wall_ms": round((time.perf_counter() - start) * 1000)})
    return row


def sweep_line(ns: Iterable[int], levels: Iterable[int], model: str = "simulated", timing: bool = False, threads: int | None = None) -> list[SweepRow]:
    if model not in LINE_MODELS:
        raise InvalidParameterError(f"unknown cost model {model!r}")
    jobs = [(n, level, model, timing) for n in sorted(set(ns)) for level in sorted(set(levels))]
    for n, *_ in jobs:
        if n < 1:
            raise InvalidParameterError("n must be >= 1")
    rows = _run_jobs(_line_row, jobs, threads)
    return sorted(rows, key=lambda r: (r.n, r.level, r.seed))


def best_levels(rows: Iterable[SweepRow]) -> dict[int, SweepRow]:
    """Per n, the row with the smallest space-time cost (ties to the lower level)."""
    best: dict[int, SweepRow] = {}
    for r in sorted(rows, key=lambda r: (r.n, r.level)):
        if r.n not in best or r.st < best[r.n].st:
            best[r.n] = r
    return best


# ---------------------------------------------------------------------------
# iMHF families


def _imhf_row(family: str, n: int, seed: int, timing: bool) -> SweepRow:
    start = time.perf_counter()
    g = make_graph(family, n, seed)
    if family == "drsample":
        # level = recursion levels of the line pebbling lifted by Trans
        plan = _attack_plan(n)
        _, c = drsample_attack(g, plan)
        level = plan.levels
    elif family in ("argon2i_a", "argon2i_b"):
        # level = depth bound d actually achieved by the layered set
        lam, d_prime = corollary_params(family, n)
        ds = reduce_layered(g, lam, d_prime)
        level = depth(g, ds.S)
        c = ed_cost(g, ds.S, level)
    else:
        raise InvalidParameterError(f"no attack for family {family!r}")
    wall = round((time.perf_counter() - start) * 1000) if timing else 0
    return SweepRow(n, level, c.time, c.space, c.space_time, c.cumulative, seed, wall)


def _attack_plan(n: int) -> RecursionPlan:
    b = min(n, drsample_block_size(n))
    return best_line_plan(-(-n // b))


def sweep_imhf(family: str, ns: Iterable[int], seeds: Iterable[int], timing: bool = False, threads: int | None = None) -> list[SweepRow]:
    jobs = [(family, n, seed, timing) for n in sorted(set(ns)) for seed in sorted(set(seeds))]
    rows = _run_jobs(_imhf_row, jobs, threads)
    return sorted(rows, key=lambda r: (r.n, r.seed, r.level))


def format_csv(rows: Iterable[SweepRow], note: str = "") -> str:
    head = f"# {CSV_VERSION}" + (f" {note}" if note else "")
    lines = [head, ",".join(CSV_COLUMNS)] + [r.csv() for r in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grover


@dataclass(frozen=True)
class GroverEstimate:
    """Brute force over 2^m candidates: sqrt(2^m) sequential evaluations of the circuit."""

    circuit_space: int
    circuit_depth: int
    domain_bits: float

    @property
    def multiplier(self) -> float:
        return 2.0 ** (self.domain_bits / 2)

    @property
    def total_st(self) -> float:
        return self.circuit_space * self.circuit_depth * self.multiplier


def grover(space: int, time_: int, domain_bits: float) -> GroverEstimate:
    if space <= 0 or time_ <= 0:
        raise InvalidParameterError("space and time must be positive")
    if domain_bits < 0 or not math.isfinite(domain_bits):
        raise InvalidParameterError("domain bits must be a finite non-negative number")
    return GroverEstimate(space, time_, domain_bits)
