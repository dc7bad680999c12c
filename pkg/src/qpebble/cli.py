"""Command-line front end.

Exit codes: 0 ok, 1 legality violation, 2 usage or parameter error,
3 unreadable or malformed input/output file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .depth_reduction import corollary_params, read_drset, reduce_layered, write_drset
from .engine import LegalityRegime, cost, read_trace, verify, write_trace
from .errors import InvalidParameterError, InvalidTraceError, ParseError, PreconditionError
from .graph import FAMILIES, Dag, drsample_block_size, format_dag, make_graph, read_dag
from .oracle import SearchSpec, optimal_cumulative, optimal_space_time, optimal_time
from .strategies import (
    RecursionPlan,
    best_line_plan,
    chunked_line_strategy,
    drsample_attack,
    ed_strategy,
    naive_strategy,
    recursive_line_strategy,
    trans,
)
from .sweep import LINE_MODELS, best_levels, format_csv, grover, sweep_imhf, sweep_line

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
EMIT_TRACE_MAX_N = 2 ** 16


class UsageError(Exception):
    pass


def parse_int(text: str) -> int:
    """Integer literal, also accepting powers written as 2^k."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return int(base) ** int(exp)
    return int(text)


def parse_int_list(text: str) -> list[int]:
    """Comma list of integers or inclusive ranges a-b; 2^k allowed in either."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(parse_int(lo), parse_int(hi) + 1))
        else:
            out.append(parse_int(part))
    return out


def _int_list_arg(text: str) -> list[int]:
    try:
        return parse_int_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="ascii", newline="\n")


def _is_line(g: Dag) -> bool:
    return g.edges == frozenset((i, i + 1) for i in range(1, g.n))


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    g = make_graph(args.family, args.n or 0, args.seed)
    _write_text(args.out, format_dag(g))
    if args.out not in (None, "-"):
        print(f"wrote {args.out}: N={g.n} edges={g.num_edges}")
    return EXIT_OK


def _plan_from_args(n: int, args) -> RecursionPlan:
    if args.factors:
        return RecursionPlan(tuple(args.factors))
    if args.levels:
        return RecursionPlan.for_levels(n, args.levels)
    return best_line_plan(n)


def _load_set(args) -> frozenset:
    if args.drset:
        return read_drset(args.drset).S
    if args.S is not None:
        return frozenset(args.S)
    raise UsageError("the ed strategy needs --S or --drset")


def cmd_attack(args) -> int:
    g = read_dag(args.graph)
    strategy = args.strategy
    if strategy in ("chunked", "recursive") and not _is_line(g):
        raise UsageError(f"strategy {strategy} applies to line graphs only")
    if strategy == "naive":
        trace = naive_strategy(g)
    elif strategy == "chunked":
        if args.k is None:
            raise UsageError("chunked needs --k")
        trace = chunked_line_strategy(g.n, args.k)
    elif strategy == "recursive":
        trace = recursive_line_strategy(g.n, _plan_from_args(g.n, args))
    elif strategy == "ed":
        S = _load_set(args)
        if args.d is None:
            raise UsageError("ed needs --d")
        trace = ed_strategy(g, S, args.d)
    elif strategy == "trans":
        if args.b is None:
            raise UsageError("trans needs --b")
        m = -(-g.n // args.b)
        trace = trans(g, recursive_line_strategy(m, _plan_from_args(m, args)), args.b)
    else:
        plan = _plan_from_args(-(-g.n // drsample_block_size(g.n)), args) if args.factors or args.levels else None
        trace, _ = drsample_attack(g, plan)
    report = cost(trace)
    print(report)
    if args.out:
        if g.n > EMIT_TRACE_MAX_N:
            raise UsageError(f"trace files are limited to N <= {EMIT_TRACE_MAX_N}")
        write_trace(trace, args.out)
    if args.check:
        bad = verify(trace, g)
        if bad:
            for v in bad:
                print(v)
            return EXIT_VIOLATION
        print("ok")
    return EXIT_OK


def _regime(args) -> LegalityRegime:
    return LegalityRegime(
        "classical" if args.classical else "quantum",
        "sequential" if args.sequential else "parallel",
        args.relaxed,
    )


def cmd_verify(args) -> int:
    g = read_dag(args.graph)
    trace = read_trace(args.trace)
    if args.target is not None:
        trace = trace.with_target(args.target)
    bad = verify(trace, g, _regime(args))
    if not bad:
        print("ok")
        return EXIT_OK
    for v in bad:
        print(v)
    return EXIT_VIOLATION


def cmd_cost(args) -> int:
    print(cost(read_trace(args.trace)))
    return EXIT_OK


def _sweep_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        if not isinstance(cfg, dict):
            raise ParseError("config must be a JSON object", 1)
    for key in ("n", "levels", "seeds", "model", "family"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "log2n", None) is not None:
        cfg["log2n"] = args.log2n
        cfg.pop("n", None)
    for key in ("n", "log2n", "levels", "seeds"):
        if isinstance(cfg.get(key), str):
            cfg[key] = parse_int_list(cfg[key])
    if "log2n" in cfg and "n" not in cfg:
        cfg["n"] = [2 ** e for e in cfg["log2n"]]
    return cfg


def cmd_sweep_line(args) -> int:
    cfg = _sweep_config(args)
    if "n" not in cfg:
        raise UsageError("sweep-line needs --n or a config with 'n'")
    levels = cfg.get("levels", list(range(0, 7)))
    model = cfg.get("model", "simulated")
    rows = sweep_line(cfg["n"], levels, model, args.timing)
    _write_text(args.out, format_csv(rows, f"line model={model}"))
    summary = sys.stdout if args.out not in (None, "-") else sys.stderr
    for n, row in best_levels(rows).items():
        print(f"best n={n} level={row.level} st={row.st}", file=summary)
    return EXIT_OK


def cmd_sweep_imhf(args) -> int:
    cfg = _sweep_config(args)
    if "n" not in cfg:
        raise UsageError("sweep-imhf needs --n or a config with 'n'")
    family = cfg.get("family", "drsample")
    rows = sweep_imhf(family, cfg["n"], cfg.get("seeds", [0]), args.timing)
    _write_text(args.out, format_csv(rows, f"imhf family={family}"))
    return EXIT_OK


def cmd_reduce(args) -> int:
    g = read_dag(args.graph)
    lam, d_prime = args.lam, args.d_prime
    if lam is None or d_prime is None:
        if args.family is None:
            raise UsageError("give --lambda and --d-prime, or --family for the default choice")
        lam, d_prime = corollary_params(args.family, g.n)
    ds = reduce_layered(g, lam, d_prime)
    print(f"e={ds.e} d={ds.d} lambda={ds.lam} d_prime={ds.d_prime} verified={str(ds.verified).lower()}")
    if args.out:
        write_drset(ds, args.out)
    return EXIT_OK if ds.verified else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    g = read_dag(args.graph)
    target = frozenset(args.target) if args.target is not None else g.sinks
    model = "classical" if args.classical else "quantum"
    if args.cap is None and not args.cc:
        best = optimal_space_time(g, target, model)
        print(f"s*={best.space} t*={best.time} st*={best.space_time}")
        witness = best.witness
    else:
        cap = g.n if args.cap is None else args.cap
        spec = SearchSpec(g, target, cap, "min_cc" if args.cc else "min_time_at_cap", model)
        res = optimal_cumulative(spec) if args.cc else optimal_time(spec)
        if not res.reachable:
            print("unreachable")
            return EXIT_VIOLATION
        print(f"{'cc' if args.cc else 't'}={res.value} cap={cap}")
        witness = res.witness
    if args.out:
        write_trace(witness, args.out)
    return EXIT_OK


def cmd_grover(args) -> int:
    est = grover(args.space, args.time, args.domain_bits)
    total = est.total_st
    shown = int(total) if total.is_integer() else total
    print(f"space={est.circuit_space} depth={est.circuit_depth} domain_bits={args.domain_bits:g} "
          f"multiplier={est.multiplier:g} total_st={shown}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpebble", description="Parallel quantum pebbling toolkit.")
    p.add_argument("--version", action="version", version=f"qpebble {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="write a graph in edge-list format")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("n", nargs="?", type=parse_int, help="node count (ignored by fixed examples)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("attack", help="run a pebbling strategy and print its cost")
    s.add_argument("graph")
    s.add_argument("--strategy", choices=("naive", "chunked", "recursive", "ed", "trans", "auto"), default="auto")
    s.add_argument("--k", type=int, help="chunk size for chunked")
    s.add_argument("--levels", type=int, help="recursion levels for the line pebbling")
    s.add_argument("--factors", type=_int_list_arg, help="explicit branching factors, outermost first")
    s.add_argument("--S", type=_int_list_arg, help="depth-reducing set as a comma list")
    s.add_argument("--drset", help="depth-reducing set file")
    s.add_argument("--d", type=int, help="depth bound for ed")
    s.add_argument("--b", type=int, help="block size for trans")
    s.add_argument("--check", action="store_true", help="also verify the trace")
    s.add_argument("-o", "--out", help="trace file to write")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("verify", help="check a trace against the legality conditions")
    s.add_argument("graph")
    s.add_argument("trace")
    model = s.add_mutually_exclusive_group()
    model.add_argument("--quantum", action="store_true", default=True)
    model.add_argument("--classical", action="store_true")
    sched = s.add_mutually_exclusive_group()
    sched.add_argument("--parallel", action="store_true", default=True)
    sched.add_argument("--sequential", action="store_true")
    s.add_argument("--relaxed", action="store_true", help="only require the target to be pebbled at the end")
    s.add_argument("--target", type=_int_list_arg, help="override the trace's target set")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("cost", help="print the cost of a trace file")
    s.add_argument("trace")
    s.set_defaults(func=cmd_cost)

    s = sub.add_parser("sweep-line", help="cost of recursive line pebblings over n and levels")
    s.add_argument("--n", type=_int_list_arg, help="sizes, e.g. 1024,2^12")
    s.add_argument("--log2n", type=_int_list_arg, help="size exponents, e.g. 10-16")
    s.add_argument("--levels", type=_int_list_arg, help="recursion levels (default 0-6)")
    s.add_argument("--model", choices=LINE_MODELS)
    s.add_argument("--config", help="JSON file with keys n or log2n, levels, model")
    s.add_argument("--timing", action="store_true", help="fill wall_ms (otherwise 0 for reproducible output)")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_sweep_line)

    s = sub.add_parser("sweep-imhf", help="attack cost on sampled iMHF graphs")
    s.add_argument("--family", choices=("drsample", "argon2i_a", "argon2i_b"))
    s.add_argument("--n", type=_int_list_arg)
    s.add_argument("--log2n", type=_int_list_arg)
    s.add_argument("--seeds", type=_int_list_arg)
    s.add_argument("--config", help="JSON file with keys family, n or log2n, seeds")
    s.add_argument("--timing", action="store_true")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_sweep_imhf)

    s = sub.add_parser("reduce", help="build a layered depth-reducing set")
    s.add_argument("graph")
    s.add_argument("--family", choices=("argon2i_a", "argon2i_b"))
    s.add_argument("--lambda", dest="lam", type=int)
    s.add_argument("--d-prime", dest="d_prime", type=int)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("oracle", help="exhaustive optimum on a small graph")
    s.add_argument("graph")
    s.add_argument("--target", type=_int_list_arg)
    s.add_argument("--cap", type=int, help="space cap; report the minimum time under it")
    s.add_argument("--cc", action="store_true", help="minimise cumulative cost instead")
    s.add_argument("--classical", action="store_true")
    s.add_argument("-o", "--out", help="witness trace file")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("grover", help="space-time estimate of a Grover brute force")
    s.add_argument("--space", type=int, required=True)
    s.add_argument("--time", type=int, required=True)
    s.add_argument("--domain-bits", type=float, required=True)
    s.set_defaults(func=cmd_grover)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qpebble: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidTraceError, OSError, UnicodeDecodeError) as exc:
        print(f"qpebble: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidParameterError, PreconditionError) as exc:
        print(f"qpebble: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
