"""Layered depth-reducing sets for Argon2i-style graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidParameterError, ParseError
from .graph import Dag, depth, longest_path

DRSET_HEADER = "pebble-drset v1"


@dataclass(frozen=True)
class DepthReducingSet:
    n: int
    S: frozenset
    d: int
    lam: int | None = None
    d_prime: int | None = None
    verified: bool = False

    @property
    def e(self) -> int:
        return len(self.S)


def layer_size(n: int, lam: int) -> int:
    return -(-n // lam)


def reduce_layered(g: Dag, lam: int, d_prime: int) -> DepthReducingSet:
    """Cut ``g`` into ``lam`` layers of consecutive nodes and break every layer.

    A node joins S when one of its non-path parents lies in its own layer, or
    when its 1-based offset within the layer is a multiple of ``d_prime``.
    What survives inside a layer is a union of path fragments shorter than
    ``d_prime``, so depth(G - S) <= d_prime * lam; this is checked, not assumed.
    """
    n = g.n
    if not 0 < lam < n:
        raise InvalidParameterError(f"lambda must lie in (0,{n}), got {lam}")
    if not 0 < d_prime * lam < n:
        raise InvalidParameterError(f"d' must lie in (0,N/lambda), got {d_prime}")
    size = layer_size(n, lam)
    S = set()
    for v in g.nodes():
        layer, offset = divmod(v - 1, size)
        if (offset + 1) % d_prime == 0:
            S.add(v)
            continue
        start = layer * size + 1
        if any(p >= start and p != v - 1 for p in g.parents[v]):
            S.add(v)
    S = frozenset(S)
    d = d_prime * lam
    return DepthReducingSet(n, S, d, lam, d_prime, depth(g, S) <= d)


def corollary_params(family: str, n: int) -> tuple[int, int]:
    """(lambda, d') for the Argon2i families, ceilings of the real-valued choices."""
    if n < 16:
        raise InvalidParameterError("reduction parameters need n >= 16")
    log_n = math.log2(n)
    if family == "argon2i_a":
        lam = math.ceil(math.sqrt(log_n))
        d_prime = math.ceil(2 * math.sqrt(log_n) / math.log(log_n))
    elif family == "argon2i_b":
        lam = math.ceil(log_n ** (2 / 3))
        d_prime = math.ceil(log_n ** (1 / 3) / 2)
    else:
        raise InvalidParameterError(f"no reduction parameters for family {family!r}")
    return max(1, lam), max(1, d_prime)


def expected_set_size(family: str, n: int, lam: int, d_prime: int) -> float:
    """Expected |S| from the layering argument (an upper-bound estimate)."""
    if family == "argon2i_a":
        return n / d_prime + n * math.log(lam) / lam
    if family == "argon2i_b":
        return n / d_prime + 2 * n / math.sqrt(lam)
    raise InvalidParameterError(f"no size estimate for family {family!r}")


def verify_reducible(g: Dag, S, d: int) -> tuple[bool, list[int]]:
    """(True, []) when depth(G - S) <= d, else (False, a longest path of G - S)."""
    S = frozenset(S)
    if depth(g, S) <= d:
        return True, []
    return False, longest_path(g, S)


def format_drset(ds: DepthReducingSet) -> str:
    lines = [f"{DRSET_HEADER} {ds.n} {ds.d}"] + [str(v) for v in sorted(ds.S)]
    return "\n".join(lines) + "\n"


def write_drset(ds: DepthReducingSet, path) -> None:
    Path(path).write_text(format_drset(ds), encoding="ascii", newline="\n")


def parse_drset(text: str) -> DepthReducingSet:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 4 or " ".join(head[:2]) != DRSET_HEADER:
        raise ParseError(f"expected header '{DRSET_HEADER} <N> <d>'", 1)
    try:
        n, d = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError("N and d must be integers", 1) from None
    ids = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            v = int(line)
        except ValueError:
            raise ParseError("node id is not an integer", lineno) from None
        if not 1 <= v <= n:
            raise ParseError(f"node id out of range [1,{n}]", lineno)
        if ids and v <= ids[-1]:
            raise ParseError("ids must be strictly ascending", lineno)
        ids.append(v)
    return DepthReducingSet(n, frozenset(ids), d)


def read_drset(path) -> DepthReducingSet:
    return parse_drset(Path(path).read_text(encoding="ascii"))
