"""Command-line interface.

Exit codes: 0 = Empty / inclusion holds / member true / valid,
1 = NonEmpty / violated / false, 2 = Unknown, 3 = usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .automaton import AutomatonError, Foaa, complement, intersect, parse, parse_word, print_automaton, union, validate
from .emptiness import Budget, Empty, EmptinessError, NonEmpty, Stats, Unknown, check_emptiness
from .frontends import (
    FrontendError,
    format_timed_word,
    from_register,
    from_timed,
    inclusion,
    parse_register,
    parse_timed,
    parse_timed_word,
    timed_to_data_word,
)
from .sexp import SexpError, parse_all
from .solver import SolverSession
from .symbolic import member

EXIT_HOLDS = 0
EXIT_VIOLATED = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


class CliError(Exception):
    pass


def _load_automaton(path: str) -> Foaa:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise CliError(str(e))
    head = _file_head(text)
    try:
        if head == "timed":
            return from_timed(parse_timed(text))
        if head == "register":
            return from_register(parse_register(text))
        return parse(text)
    except (AutomatonError, FrontendError, SexpError) as e:
        raise CliError(f"{path}: {e}")


def _file_head(text: str) -> str | None:
    try:
        forms = parse_all(text)
    except SexpError:
        return None
    if forms and hasattr(forms[0], "items") and forms[0].items:
        return getattr(forms[0].items[0], "text", None)
    return None


def _budget(args) -> Budget:
    return Budget(args.max_nodes, args.wall_time, args.solver_timeout)


def _solver(args):
    if getattr(args, "no_solver", False):
        return None
    return SolverSession(getattr(args, "solver", None), timeout=args.solver_timeout)


def _parse_any_word(a: Foaa, text: str):
    if "@" in text and "{" not in text:
        return timed_to_data_word(parse_timed_word(text))
    return parse_word(text, a)


def _format_word(a: Foaa, word) -> str:
    from .automaton import format_word

    return format_word(word)


def _emit(args, payload: dict, text_lines: list):
    if args.json:
        print(json.dumps(payload))
    else:
        for line in text_lines:
            print(line)


def cmd_empty(args) -> int:
    a = _load_automaton(args.file)
    stats = Stats()
    solver = _solver(args)
    t0 = time.monotonic()
    try:
        verdict = check_emptiness(a, _budget(args), solver=solver, stats=stats)
    finally:
        if solver is not None:
            solver.close()
    elapsed = time.monotonic() - t0
    payload = {
        "verdict": None,
        "witness": None,
        "Nodes Expanded": stats.nodes_expanded,
        "Nodes Visited": stats.nodes_visited,
        "time_seconds": round(elapsed, 3),
    }
    if isinstance(verdict, Empty):
        payload["verdict"] = "Empty"
        lines = ["Empty"]
        dump = verdict.certificate.dump()
    elif isinstance(verdict, NonEmpty):
        payload["verdict"] = "NonEmpty"
        payload["witness"] = _format_word(a, verdict.witness)
        lines = [f"NonEmpty {payload['witness']}"]
        dump = None
    else:
        payload["verdict"] = "Unknown"
        payload["reason"] = verdict.reason
        lines = [f"Unknown ({verdict.reason})"]
        dump = verdict.partial.dump()
    lines.append(f"Nodes Expanded: {stats.nodes_expanded}")
    lines.append(f"Nodes Visited: {stats.nodes_visited}")
    lines.append(f"Time: {elapsed:.3f} s")
    if args.dump_unfolding and dump is not None:
        with open(args.dump_unfolding, "w") as f:
            f.write(dump)
    _emit(args, payload, lines)
    if isinstance(verdict, Empty):
        return EXIT_HOLDS
    if isinstance(verdict, NonEmpty):
        return EXIT_VIOLATED
    return EXIT_UNKNOWN


def cmd_include(args) -> int:
    lhs = [_load_automaton(p) for p in args.files]
    rhs = _load_automaton(args.rhs)
    stats = Stats()
    solver = _solver(args)
    t0 = time.monotonic()
    try:
        verdict = inclusion(lhs, rhs, _budget(args), solver=solver, stats=stats)
    finally:
        if solver is not None:
            solver.close()
    elapsed = time.monotonic() - t0
    payload = {
        "verdict": None,
        "witness": None,
        "Nodes Expanded": stats.nodes_expanded,
        "Nodes Visited": stats.nodes_visited,
        "time_seconds": round(elapsed, 3),
    }
    if isinstance(verdict, Empty):
        payload["verdict"] = "Holds"
        lines = ["Holds"]
        code = EXIT_HOLDS
    elif isinstance(verdict, NonEmpty):
        payload["verdict"] = "Violated"
        payload["witness"] = _format_word(lhs[0], verdict.witness)
        lines = [f"Violated {payload['witness']}"]
        code = EXIT_VIOLATED
    else:
        payload["verdict"] = "Unknown"
        payload["reason"] = verdict.reason
        lines = [f"Unknown ({verdict.reason})"]
        code = EXIT_UNKNOWN
    lines.append(f"Nodes Expanded: {stats.nodes_expanded}")
    lines.append(f"Nodes Visited: {stats.nodes_visited}")
    lines.append(f"Time: {elapsed:.3f} s")
    _emit(args, payload, lines)
    return code


def cmd_member(args) -> int:
    a = _load_automaton(args.file)
    try:
        word = _parse_any_word(a, args.word)
    except (AutomatonError, FrontendError) as e:
        raise CliError(str(e))
    result = member(a, word)
    _emit(args, {"verdict": result}, ["true" if result else "false"])
    return EXIT_HOLDS if result else EXIT_VIOLATED


def _write_automaton(a: Foaa, out_path: str | None):
    text = print_automaton(a)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_complement(args) -> int:
    _write_automaton(complement(_load_automaton(args.file)), args.output)
    return EXIT_HOLDS


def cmd_intersect(args) -> int:
    out = _load_automaton(args.files[0])
    for p in args.files[1:]:
        out = intersect(out, _load_automaton(p))
    _write_automaton(out, args.output)
    return EXIT_HOLDS


def cmd_union(args) -> int:
    out = _load_automaton(args.files[0])
    for p in args.files[1:]:
        out = union(out, _load_automaton(p))
    _write_automaton(out, args.output)
    return EXIT_HOLDS


def cmd_translate(args) -> int:
    try:
        with open(args.file) as f:
            text = f.read()
    except OSError as e:
        raise CliError(str(e))
    try:
        if args.source == "timed":
            a = from_timed(parse_timed(text))
        else:
            a = from_register(parse_register(text))
    except (FrontendError, SexpError) as e:
        raise CliError(f"{args.file}: {e}")
    _write_automaton(a, args.output)
    return EXIT_HOLDS


def cmd_validate(args) -> int:
    a = _load_automaton(args.file)
    errors = validate(a)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        _emit(args, {"verdict": False, "errors": errors}, ["invalid"])
        return EXIT_VIOLATED
    _emit(args, {"verdict": True, "errors": []}, ["valid"])
    return EXIT_HOLDS


def cmd_gen(args) -> int:
    import os
    import random

    from .gen import random_eq_automaton, random_register_automaton, random_timed_automaton

    rng = random.Random(args.seed)
    os.makedirs(args.output, exist_ok=True)
    for i in range(args.count):
        if args.kind == "eq":
            text = print_automaton(random_eq_automaton(rng))
            name = f"eq{i:03d}.foaa"
        elif args.kind == "timed":
            t = random_timed_automaton(rng)
            text = _timed_to_text(t)
            name = f"timed{i:03d}.fta"
        else:
            r = random_register_automaton(rng)
            text = _register_to_text(r)
            name = f"register{i:03d}.fra"
        with open(os.path.join(args.output, name), "w") as f:
            f.write(text)
    print(f"wrote {args.count} {args.kind} automata to {args.output}")
    return EXIT_HOLDS


def _timed_to_text(t) -> str:
    lines = ["(timed"]
    lines.append("  (events " + " ".join(t.events) + ")")
    lines.append("  (clocks " + " ".join(t.clocks) + ")")
    for s in t.states:
        flags = (" :initial" if s in t.initial else "") + (" :final" if s in t.finals else "")
        lines.append(f"  (state {s}{flags})")
    for e in t.edges:
        parts = [f"  (edge {e.src} {e.event} {e.dst}"]
        if e.resets:
            parts.append(" :reset (" + " ".join(sorted(e.resets)) + ")")
        from .logic import TRUE

        if e.guard != TRUE:
            parts.append(f" :guard {_guard_to_text(e.guard)}")
        parts.append(")")
        lines.append("".join(parts))
    return "\n".join(lines) + ")\n"


def _guard_to_text(g) -> str:
    from .logic import And, Cmp, Const, Not, Var

    if isinstance(g, And):
        return "(and " + " ".join(_guard_to_text(a) for a in g.args) + ")"
    if isinstance(g, Not):
        return f"(not {_guard_to_text(g.arg)})"
    assert isinstance(g, Cmp)
    if isinstance(g.lhs, Var):
        return f"(<= {g.lhs.name} {g.rhs!r})"
    return f"(>= {g.rhs.name} {g.lhs!r})"


def _register_to_text(r) -> str:
    lines = [f"(register (r {r.r})"]
    lines.append("  (init " + " ".join(repr(v) for v in r.init) + ")")
    for s in r.states:
        flags = (" :initial" if s == r.initial else "") + (" :final" if s in r.finals else "")
        lines.append(f"  (state {s}{flags})")
    for src, k, dst in r.transitions:
        lines.append(f"  (trans {src} {k} {dst})")
    return "\n".join(lines) + ")\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foalt", description="First-order alternating automata toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, budgets=False):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if budgets:
            sp.add_argument("--max-nodes", type=int, default=10000)
            sp.add_argument("--wall-time", type=float, default=60.0)
            sp.add_argument("--solver-timeout", type=float, default=2.0)
            sp.add_argument("--solver", default=None, help="external SMT solver binary (default: foalt-smt)")
            sp.add_argument("--no-solver", action="store_true", help="built-in reasoning only")
            sp.add_argument("--dump-unfolding", metavar="PATH", default=None)

    sp = sub.add_parser("empty", help="language emptiness")
    sp.add_argument("file")
    common(sp, budgets=True)
    sp.set_defaults(fn=cmd_empty)

    sp = sub.add_parser("include", help="language inclusion of the intersection of LHS files in RHS")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--rhs", required=True)
    common(sp, budgets=True)
    sp.set_defaults(fn=cmd_include)

    sp = sub.add_parser("member", help="word membership")
    sp.add_argument("file")
    sp.add_argument("--word", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_member)

    for name, fn in (("complement", cmd_complement),):
        sp = sub.add_parser(name)
        sp.add_argument("file")
        sp.add_argument("-o", "--output", default=None)
        common(sp)
        sp.set_defaults(fn=fn)

    for name, fn in (("intersect", cmd_intersect), ("union", cmd_union)):
        sp = sub.add_parser(name)
        sp.add_argument("files", nargs="+")
        sp.add_argument("-o", "--output", default=None)
        common(sp)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("translate", help="timed/register frontend to core format")
    sp.add_argument("--from", dest="source", choices=("timed", "register"), required=True)
    sp.add_argument("file")
    sp.add_argument("-o", "--output", default=None)
    common(sp)
    sp.set_defaults(fn=cmd_translate)

    sp = sub.add_parser("validate")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("gen", help="random test corpus")
    sp.add_argument("--kind", choices=("eq", "timed", "register"), default="eq")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default="generated")
    common(sp)
    sp.set_defaults(fn=cmd_gen)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (CliError, EmptinessError, AutomatonError, FrontendError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
