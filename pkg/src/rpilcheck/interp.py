"""Forward interpretation of linear call-sequence programs.

A program is a list of statements ``vN = f(v...)``. Each statement is typed
against the callee's scheme, its RPIL variant is instantiated on the actual
variables, and the resulting instructions update a :class:`Context` of live
variables, reference edges and value states.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .db import FunctionDb, FunctionSpec, substitute
from .instructions import Bind, Borrow, DerefMove, DerefPin, Forget, Instruction
from .places import DEREF, Place, parse_place
from .typesys import Type, UnificationError, apply_signature, free_vars, apply, TVar


class State(str, enum.Enum):
    INITIAL = "initial"
    PINNED = "pinned"
    FORGOTTEN = "forgotten"
    PINNED_MOVED = "pinned_moved"
    PINNED_FORGOTTEN = "pinned_forgotten"

    def __str__(self):
        return self.value


VIOLATING = frozenset({State.PINNED_MOVED, State.PINNED_FORGOTTEN})

# every legal edge of the value state machine
TRANSITIONS = frozenset({
    (State.INITIAL, State.PINNED),
    (State.INITIAL, State.FORGOTTEN),
    (State.PINNED, State.PINNED_MOVED),
    (State.PINNED, State.PINNED_FORGOTTEN),
})


class ExecutionError(Exception):
    """A statement or instruction cannot be executed."""


class UnresolvedDeref(ExecutionError):
    pass


class IllegalTransition(ExecutionError):
    pass


class DeadVariable(ExecutionError):
    pass


class IllTyped(ExecutionError):
    pass


class ProgramError(ExecutionError):
    def __init__(self, line: int, cause: Exception):
        super().__init__(f"line {line}: {cause}")
        self.line = line
        self.cause = cause


@dataclass(frozen=True)
class VarInfo:
    type: Type
    alive: bool = True


@dataclass
class Context:
    vars: Dict[str, VarInfo] = field(default_factory=dict)
    edges: Dict[Tuple[Place, Place], None] = field(default_factory=dict)
    states: Dict[Place, State] = field(default_factory=dict)
    aliases: Dict[Place, Place] = field(default_factory=dict)

    def copy(self) -> "Context":
        return Context(dict(self.vars), dict(self.edges), dict(self.states), dict(self.aliases))

    def state(self, place: Place) -> State:
        return self.states.get(place, State.INITIAL)

    def alive(self, name: str) -> bool:
        info = self.vars.get(name)
        return info is not None and info.alive

    def borrows(self, ref: Place) -> List[Place]:
        return [t for (s, t) in self.edges if s == ref]

    def canonical(self, place: Place) -> Place:
        """Follow binding-induced equivalences to the latest holder."""
        seen = set()
        while place not in seen:
            seen.add(place)
            for src, dst in self.aliases.items():
                if place.is_under(dst):
                    place = src.extend(place.path[len(dst.path):])
                    break
            else:
                break
        return place

    def render(self) -> str:
        items = [f"{s}->{t}" for (s, t) in self.edges]
        items += [f"{p}:{st}" for p, st in self.states.items() if st is not State.INITIAL]
        return "{ " + ", ".join(items) + (" }" if items else "}")


@dataclass(frozen=True)
class Statement:
    ret: str
    fn: str
    args: Tuple[str, ...] = ()
    variant: int = 0

    def __str__(self):
        suffix = f" @{self.variant}" if self.variant else ""
        return f"{self.ret} = {self.fn}({', '.join(self.args)}){suffix}"


Program = Tuple[Statement, ...]


# -- operand resolution ------------------------------------------------------

def resolve_all(ctx: Context, operand: Place) -> List[Place]:
    """Every deref-free place the operand can denote.

    Each ``*`` follows all outgoing edges of the place built so far; an
    operand with no deref resolves to itself.
    """
    current = [Place(operand.root)]
    for sel in operand.path:
        if sel is DEREF:
            nxt: List[Place] = []
            for c in current:
                for t in ctx.borrows(c):
                    if t not in nxt:
                        nxt.append(t)
            if not nxt:
                raise UnresolvedDeref(f"nothing is referenced by {current[0]} in {operand}")
            current = nxt
        else:
            current = [c.index(sel) for c in current]
    return current


def resolve(ctx: Context, operand: Place) -> Place:
    return resolve_all(ctx, operand)[0]


# -- instruction semantics ---------------------------------------------------

def _transition(ctx: Context, place: Place, new: State) -> None:
    old = ctx.state(place)
    if old is new:
        return
    if (old, new) not in TRANSITIONS:
        raise IllegalTransition(f"{place}: {old} -> {new}")
    ctx.states[place] = new


def _targets(ctx: Context, ref: Place) -> List[Place]:
    out: List[Place] = []
    for r in resolve_all(ctx, ref):
        for t in ctx.borrows(r):
            if t not in out:
                out.append(t)
    return out


def _behind_pointer(ctx: Context, moved: Place, inner: Place) -> bool:
    # `inner` sits under `moved` but is reached through a reference stored
    # inside `moved` (boxed content): moving the owner leaves it in place.
    for src, dst in ctx.edges:
        if src.is_under(moved) and inner.is_under(dst) and dst != moved:
            return True
    return False


def apply_instruction(ctx: Context, instr: Instruction) -> Context:
    out = ctx.copy()
    step(out, instr)
    return out


def step(ctx: Context, instr: Instruction) -> None:
    """Apply ``instr`` to ``ctx`` in place."""
    if isinstance(instr, Borrow):
        refs = resolve_all(ctx, instr.lhs)
        targets = resolve_all(ctx, instr.rhs)
        for r in refs:
            for t in targets:
                ctx.edges[(r, t)] = None
    elif isinstance(instr, Bind):
        holders = resolve_all(ctx, instr.lhs)
        sources = resolve_all(ctx, instr.rhs)
        for q in sources:
            n = len(q.path)
            moved_edges = [(s, t) for (s, t) in ctx.edges if s.is_under(q)]
            moved_states = [(p, st) for p, st in ctx.states.items() if p.is_under(q)]
            for p in holders:
                for s, t in moved_edges:
                    ctx.edges[(p.extend(s.path[n:]), t)] = None
                for x, st in moved_states:
                    ctx.states.setdefault(p.extend(x.path[n:]), st)
                if p != q:
                    ctx.aliases[p] = q
    elif isinstance(instr, DerefPin):
        for t in _targets(ctx, instr.ref):
            st = ctx.state(t)
            if st is State.PINNED:
                continue
            _transition(ctx, t, State.PINNED)
    elif isinstance(instr, DerefMove):
        for q in _targets(ctx, instr.ref):
            if ctx.state(q) is State.FORGOTTEN:
                raise IllegalTransition(f"{q}: cannot move a forgotten value")
            for x, st in list(ctx.states.items()):
                if st is State.PINNED and x.is_under(q):
                    if x != q and _behind_pointer(ctx, q, x):
                        continue
                    ctx.states[x] = State.PINNED_MOVED
    elif isinstance(instr, Forget):
        for p in resolve_all(ctx, instr.place):
            st = ctx.state(p)
            if st is State.INITIAL:
                ctx.states[p] = State.FORGOTTEN
            elif st is State.PINNED:
                ctx.states[p] = State.PINNED_FORGOTTEN
            else:
                raise IllegalTransition(f"{p}: cannot forget a value in state {st}")
    else:
        raise TypeError(f"not an instruction: {instr!r}")


# -- statements and programs -------------------------------------------------

def call_type(spec: FunctionSpec, arg_types: Sequence[Type], ret: str) -> Type:
    try:
        t = apply_signature(spec.scheme, arg_types, tag=ret)
    except UnificationError as exc:
        raise IllTyped(f"{spec.name}: {exc}") from exc
    # leftover variables are named after the defining line for determinism
    names = free_vars(t)
    if names:
        t = apply({n: TVar(f"?{ret}.{i}") for i, n in enumerate(names)}, t)
    return t


def exec_statement(ctx: Context, stmt: Statement, db: FunctionDb,
                   check_liveness: bool = True, ret_type: Optional[Type] = None,
                   body: Optional[Sequence[Instruction]] = None) -> Context:
    """Execute one line. ``ret_type`` and ``body`` let callers that already
    typed and instantiated the statement skip that work."""
    try:
        spec = db[stmt.fn]
    except KeyError as exc:
        raise ExecutionError(str(exc.args[0])) from None
    if len(stmt.args) != spec.arity:
        raise IllTyped(f"{spec.name} takes {spec.arity} argument(s), got {len(stmt.args)}")
    if stmt.ret in ctx.vars:
        raise ExecutionError(f"{stmt.ret} is already defined")
    for a in stmt.args:
        info = ctx.vars.get(a)
        if info is None or (check_liveness and not info.alive):
            raise DeadVariable(f"dead or undefined variable {a}")
    if not 0 <= stmt.variant < len(spec.variants):
        raise ExecutionError(f"{spec.name} has no variant {stmt.variant}")
    if ret_type is None:
        ret_type = call_type(spec, [ctx.vars[a].type for a in stmt.args], stmt.ret)
    if body is None:
        body = substitute(spec.variants[stmt.variant], stmt.ret, stmt.args)

    out = ctx.copy()
    out.vars[stmt.ret] = VarInfo(ret_type, True)
    for instr in body:
        step(out, instr)
    consumed = {a for a, c in zip(stmt.args, spec.consumes) if c}
    if consumed:
        for a in consumed:
            out.vars[a] = VarInfo(out.vars[a].type, False)
        retract_dead(out)
    return out


def retract_dead(ctx: Context) -> None:
    """Drop every edge whose source or target belongs to a dead variable."""
    dead = {n for n, info in ctx.vars.items() if not info.alive}
    if dead:
        ctx.edges = {e: None for e in ctx.edges
                     if e[0].root not in dead and e[1].root not in dead}


def interpret(program: Sequence[Statement], db: FunctionDb,
              ctx: Optional[Context] = None) -> List[Context]:
    """Run ``program``; returns the context after every line."""
    trace: List[Context] = []
    ctx = ctx or Context()
    for lineno, stmt in enumerate(program, 1):
        try:
            ctx = exec_statement(ctx, stmt, db)
        except ExecutionError as exc:
            raise ProgramError(lineno, exc) from exc
        trace.append(ctx)
    return trace


def final_context(program: Sequence[Statement], db: FunctionDb) -> Context:
    trace = interpret(program, db)
    return trace[-1] if trace else Context()


def violations(ctx: Context) -> List[Tuple[Place, State]]:
    return [(p, st) for p, st in ctx.states.items() if st in VIOLATING]


# -- program text ------------------------------------------------------------

_STMT = re.compile(r"^\s*(?:let\s+(?:mut\s+)?)?(\w+)\s*=\s*(.+?)\((.*)\)\s*(?:@(\d+))?\s*[;,]?\s*(?://.*)?$")


class ProgramSyntaxError(ValueError):
    pass


def parse_statement(text: str) -> Statement:
    m = _STMT.match(text)
    if not m:
        raise ProgramSyntaxError(f"not a statement: {text!r}")
    ret, fn, args, variant = m.groups()
    arg_list = tuple(a.strip() for a in args.split(",") if a.strip())
    return Statement(ret, fn.strip(), arg_list, int(variant or 0))


def parse_program(text: str) -> Program:
    stmts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith(("#", "//")):
            continue
        try:
            stmts.append(parse_statement(line))
        except ProgramSyntaxError as exc:
            raise ProgramSyntaxError(f"line {lineno}: {exc}") from None
    return tuple(stmts)


def render_trace(trace: Iterable[Context]) -> str:
    return "\n".join(f"line {i}: {ctx.render()}" for i, ctx in enumerate(trace, 1))


def trace_report(program: Sequence[Statement], trace: Sequence[Context],
                 error: Optional[ProgramError] = None) -> dict:
    """JSON-ready report: statements, per-line edges/states, violations."""
    final = trace[-1] if trace else Context()
    return {
        "statements": [str(s) for s in program],
        "lines": [
            {
                "line": i,
                "edges": [[str(s), str(t)] for (s, t) in ctx.edges],
                "states": {str(p): st.value for p, st in ctx.states.items()},
                "vars": {n: {"type": str(v.type), "alive": v.alive} for n, v in ctx.vars.items()},
            }
            for i, ctx in enumerate(trace, 1)
        ],
        "violations": [[str(p), st.value] for p, st in violations(final)],
        "error": None if error is None else {"line": error.line, "message": str(error.cause)},
    }
