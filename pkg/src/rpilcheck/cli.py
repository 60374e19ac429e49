"""Command-line entry point: ``rpilcheck {translate,interpret,synthesize}``.

Exit codes: 0 clean or nothing found, 2 violation found, 1 input error,
3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .db import DatabaseError, FunctionDb, parse_function_db
from .interp import (
    Context, ExecutionError, ProgramError, ProgramSyntaxError, exec_statement,
    parse_program, render_trace, trace_report, violations,
)
from .mirlite import (
    DEFAULT_INTRINSICS, MirError, export_function_db, parse_intrinsics, parse_mirlite,
    publish_order, translate,
)
from .places import PlaceSyntaxError
from .synth import (
    Budget, BudgetExhausted, Strategy, ViolationGoal, all_solutions, emit_program,
    parse_goal, synthesize,
)

EXIT_CLEAN, EXIT_ERROR, EXIT_VIOLATION, EXIT_BUDGET = 0, 1, 2, 3
MAX_FUNCTIONS = 10


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_db(path: str, defaults: Optional[bool] = None) -> FunctionDb:
    try:
        db = parse_function_db(_read(path))
    except DatabaseError as exc:
        raise InputError(f"{path}: {exc}") from None
    if defaults is False and db.defaults:
        db = FunctionDb.from_specs(db.library, defaults=False)
    return db


# -- subcommands -------------------------------------------------------------

def cmd_translate(args, out) -> int:
    text = _read(args.input)
    intrinsics_text = _read(args.intrinsics) if args.intrinsics else DEFAULT_INTRINSICS
    try:
        intrinsics = parse_intrinsics(intrinsics_text)
        program = parse_mirlite(text)
    except MirError as exc:
        raise InputError(str(exc)) from None
    if not len(program):
        print("warning: no functions in input; writing an empty database", file=sys.stderr)
    translations = {}
    failed: List[str] = []
    for fn in program:
        try:
            tr = translate(fn, program, intrinsics)
        except MirError as exc:
            raise InputError(str(exc)) from None
        translations[fn.name] = tr
        for why in tr.dropped:
            print(f"warning: {fn.name}: path dropped: {why}", file=sys.stderr)
        if fn.public and not tr.variants:
            failed.append(fn.name)
    if failed:
        raise InputError(f"no variant survives the caps for: {', '.join(failed)}")
    ordered = publish_order(list(program))
    for fn in ordered:
        if fn.public:
            print(f"{fn.name}: {len(translations[fn.name].variants)} variant(s)", file=out)
    db_text = export_function_db(ordered, translations)
    Path(args.out).write_text(db_text)
    return EXIT_CLEAN


def cmd_interpret(args, out) -> int:
    db = _load_db(args.db)
    try:
        program = parse_program(_read(args.program))
    except ProgramSyntaxError as exc:
        raise InputError(f"{args.program}: {exc}") from None
    trace: List[Context] = []
    ctx = Context()
    error: Optional[ProgramError] = None
    for lineno, stmt in enumerate(program, 1):
        try:
            ctx = exec_statement(ctx, stmt, db)
        except ExecutionError as exc:
            error = ProgramError(lineno, exc)
            break
        trace.append(ctx)
    if args.emit == "json":
        print(json.dumps(trace_report(program, trace, error), indent=2), file=out)
    elif trace:
        print(render_trace(trace), file=out)
    if error is not None:
        print(f"error: line {error.line}: {error.cause}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_VIOLATION if violations(ctx) else EXIT_CLEAN


def cmd_synthesize(args, out) -> int:
    db = _load_db(args.db, defaults=False if args.no_defaults else None)
    names = [n.strip() for n in args.functions.split(",") if n.strip()] if args.functions else None
    try:
        db = db.select(names, limit=MAX_FUNCTIONS)
        goal = parse_goal(args.goal)
    except (DatabaseError, ValueError, PlaceSyntaxError) as exc:
        raise InputError(str(exc)) from None
    strategy = Strategy(args.strategy)
    budget = Budget(args.timeout_secs, args.stub_budget)

    if args.all_solutions:
        try:
            sols = all_solutions(db, goal, args.max_len, strategy, budget)
        except BudgetExhausted as exc:
            print(f"budget exhausted: {exc.reason}", file=sys.stderr)
            if args.emit == "json":
                print(json.dumps(exc.report.to_json(), indent=2), file=out)
            return EXIT_BUDGET
        if args.emit == "json":
            print(json.dumps({"goal": str(goal), "strategy": str(strategy), "len": args.max_len,
                              "solutions": [[str(s) for s in p] for p in sols]}, indent=2), file=out)
        else:
            for i, prog in enumerate(sols, 1):
                print(f"# solution {i}", file=out)
                print(emit_program(prog, db, "annotated"), file=out)
            print(f"{len(sols)} solution(s) of length {args.max_len}", file=out)
        return _found_code(goal, bool(sols))

    try:
        report = synthesize(db, goal, args.max_len, strategy, budget)
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc.reason} (reached length {exc.report.length_reached})",
              file=sys.stderr)
        if args.emit == "json":
            print(json.dumps(exc.report.to_json(), indent=2), file=out)
        return EXIT_BUDGET
    if args.emit == "json":
        print(json.dumps(report.to_json(), indent=2), file=out)
    elif report.found is not None:
        print(emit_program(report.found, db, "annotated"), file=out)
        print(f"witness: {report.witness}", file=out)
        print(f"length: {len(report.found)}  stubs: {report.stubs_explored}  "
              f"time: {report.wall_time:.3f}s", file=out)
    else:
        print(f"no violation up to length {args.max_len}" if _is_violation(goal)
              else f"goal not reachable up to length {args.max_len}", file=out)
        print(f"stubs: {report.stubs_explored}  time: {report.wall_time:.3f}s", file=out)
    return _found_code(goal, report.found is not None)


def _is_violation(goal) -> bool:
    from .interp import VIOLATING
    from .synth import StateGoal
    return isinstance(goal, ViolationGoal) or (
        isinstance(goal, StateGoal) and goal.state in VIOLATING)


def _found_code(goal, found: bool) -> int:
    # only a violating goal counts as a violation for the exit status
    return EXIT_VIOLATION if found and _is_violation(goal) else EXIT_CLEAN


# -- argument parsing --------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpilcheck", description="Detect pin-contract violations by program synthesis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="translate MIR-lite into a function database")
    p.add_argument("--input", required=True)
    p.add_argument("--intrinsics", help="intrinsic table (default: built-in table)")
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_translate)

    p = sub.add_parser("interpret", help="run a program and print its contexts")
    p.add_argument("--db", required=True)
    p.add_argument("--program", required=True)
    p.add_argument("--emit", choices=("text", "json"), default="text")
    p.set_defaults(run=cmd_interpret)

    p = sub.add_parser("synthesize", help="search for a minimal program reaching a goal")
    p.add_argument("--db", required=True)
    p.add_argument("--goal", default="any",
                   help="pinned_moved | pinned_forgotten | any | borrows:R:P")
    p.add_argument("--max-len", type=_positive_int, default=8)
    p.add_argument("--strategy", choices=("eager", "lazy"), default="lazy")
    p.add_argument("--timeout-secs", type=_positive_float, default=Budget.timeout_secs)
    p.add_argument("--stub-budget", type=_positive_int, default=Budget.max_stubs)
    p.add_argument("--functions", help=f"comma-separated whitelist (at most {MAX_FUNCTIONS})")
    p.add_argument("--no-defaults", action="store_true", help="drop the built-in functions")
    p.add_argument("--emit", choices=("text", "json"), default="text")
    p.add_argument("--all-solutions", action="store_true",
                   help="list every solution of exactly --max-len lines")
    p.set_defaults(run=cmd_synthesize)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out or sys.stdout)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
