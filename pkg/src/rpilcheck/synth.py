"""Synthesis of minimal programs reaching a goal context.

Programs are enumerated in canonical form (line ``i`` defines ``v<i>`` and
reads only earlier variables) by depth-first extension, one target length at
a time. Candidates are ordered by database order, then argument tuples in
ascending variable order, then variant index, so the first solution found at
the smallest length is reproducible.

Two checking strategies accept exactly the same programs:

``EAGER``
    every extension is executed under the full rules (typing, liveness,
    reference retraction, state machine) and rejected as soon as any fails.
``LAZY``
    extensions are only typed and tracked for reference edges; liveness and
    the state machine are validated once a candidate reaches the target
    length. Because the lazy edge set is always a superset of the eager
    one, every rejection made early is also an eager rejection.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from . import bound as lb
from .db import FunctionDb, FunctionSpec, substitute
from .instructions import Bind, Borrow, DerefMove, DerefPin, Forget, render_body
from .interp import (
    Context, ExecutionError, Program, State, Statement, VIOLATING, call_type,
    exec_statement, resolve_all, violations,
)
from .places import Place
from .typesys import Type, UnificationError, height, instantiate, unify


# -- goals -------------------------------------------------------------------

@dataclass(frozen=True)
class StateGoal:
    """Some place (or the given one) ends in ``state``."""

    state: State
    place: Optional[Place] = None

    def witness(self, ctx: Context) -> Optional[Place]:
        if self.place is not None:
            p = ctx.canonical(self.place)
            for cand in (self.place, p):
                if ctx.state(cand) is self.state:
                    return cand
            return None
        if self.state is State.INITIAL:
            return None
        for p, st in ctx.states.items():
            if st is self.state:
                return p
        return None

    def satisfied(self, ctx: Context) -> bool:
        if self.state is State.INITIAL and self.place is None:
            return True
        if self.state is State.INITIAL:
            return ctx.state(self.place) is State.INITIAL
        return self.witness(ctx) is not None

    def __str__(self):
        return f"state({self.place or '_'}, {self.state})"

    @property
    def bound_kind(self) -> str:
        return {
            State.PINNED_MOVED: lb.PIN_THEN_MOVE,
            State.PINNED_FORGOTTEN: lb.PIN_THEN_FORGET,
            State.PINNED: lb.PIN_ONLY,
            State.FORGOTTEN: lb.FORGET_ONLY,
        }.get(self.state, lb.NO_BOUND)


@dataclass(frozen=True)
class BorrowGoal:
    """The edge ``ref -> target`` is present at the end."""

    ref: Place
    target: Place

    def witness(self, ctx: Context) -> Optional[Place]:
        return self.target if (self.ref, self.target) in ctx.edges else None

    def satisfied(self, ctx: Context) -> bool:
        return (self.ref, self.target) in ctx.edges

    def __str__(self):
        return f"borrows({self.ref}, {self.target})"

    bound_kind = lb.NO_BOUND


@dataclass(frozen=True)
class ViolationGoal:
    """Some place ends in ``pinned_moved`` or ``pinned_forgotten``."""

    def witness(self, ctx: Context) -> Optional[Place]:
        found = violations(ctx)
        return found[0][0] if found else None

    def satisfied(self, ctx: Context) -> bool:
        return any(st in VIOLATING for st in ctx.states.values())

    def __str__(self):
        return "violation(_)"

    bound_kind = lb.PIN_THEN_ANY


Goal = Union[StateGoal, BorrowGoal, ViolationGoal]


def parse_goal(text: str) -> Goal:
    """``pinned_moved`` | ``pinned_forgotten`` | ``any`` | ``borrows:R:P`` |
    ``<state>`` | ``<state>:<place>``."""
    from .places import parse_place

    text = text.strip()
    if text in ("any", "violation"):
        return ViolationGoal()
    if text.startswith("borrows:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected borrows:R:P, got {text!r}")
        return BorrowGoal(parse_place(parts[1]), parse_place(parts[2]))
    state, _, place = text.partition(":")
    try:
        st = State(state)
    except ValueError:
        raise ValueError(f"unknown goal {text!r}") from None
    return StateGoal(st, parse_place(place) if place else None)


# -- configuration and reports -----------------------------------------------

class Strategy(str, enum.Enum):
    EAGER = "eager"
    LAZY = "lazy"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Budget:
    timeout_secs: float = 10 * 3600.0
    max_stubs: int = 10 ** 9


@dataclass(frozen=True)
class Limits:
    """Caps keeping the candidate space finite."""

    max_path_depth: int = 4
    max_type_height: int = 5
    goal_pruning: bool = True


class BudgetExhausted(Exception):
    def __init__(self, reason: str, report: "SynthesisReport"):
        super().__init__(reason)
        self.reason = reason
        self.report = report


@dataclass
class LengthStats:
    length: int
    stubs: int = 0
    solutions: int = 0
    seconds: float = 0.0


@dataclass
class SynthesisReport:
    goal: Goal
    strategy: Strategy
    max_len: int
    found: Optional[Program] = None
    witness: Optional[Place] = None
    length_reached: int = 0
    stubs_explored: int = 0
    wall_time: float = 0.0
    per_length: List[LengthStats] = field(default_factory=list)
    exhausted: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "goal": str(self.goal),
            "strategy": str(self.strategy),
            "max_len": self.max_len,
            "found": None if self.found is None else [str(s) for s in self.found],
            "witness_place": None if self.witness is None else str(self.witness),
            "stubs_explored": self.stubs_explored,
            "wall_time_ms": round(self.wall_time * 1000, 3),
            "per_length": [
                {"len": s.length, "stubs": s.stubs, "solutions": s.solutions}
                for s in self.per_length
            ],
            "budget_exhausted": self.exhausted,
        }


# -- lazy bookkeeping --------------------------------------------------------

class _LazyCtx:
    """Edges and pin marks only; liveness and states are not tracked."""

    __slots__ = ("types", "edges", "pinned", "hit")

    def __init__(self, types=None, edges=None, pinned=None, hit=False):
        self.types: Dict[str, Type] = types if types is not None else {}
        self.edges: Dict[Tuple[Place, Place], None] = edges if edges is not None else {}
        self.pinned: Dict[Place, None] = pinned if pinned is not None else {}
        self.hit = hit

    def borrows(self, ref: Place) -> List[Place]:
        return [t for (s, t) in self.edges if s == ref]


def _lazy_step(ctx: _LazyCtx, instr, kind: str) -> None:
    # mirrors interp.step on edges; raises only when eager would too
    if isinstance(instr, Borrow):
        refs = resolve_all(ctx, instr.lhs)
        targets = resolve_all(ctx, instr.rhs)
        for r in refs:
            for t in targets:
                ctx.edges[(r, t)] = None
    elif isinstance(instr, Bind):
        holders = resolve_all(ctx, instr.lhs)
        for q in resolve_all(ctx, instr.rhs):
            n = len(q.path)
            moved = [(s, t) for (s, t) in ctx.edges if s.is_under(q)]
            marks = [x for x in ctx.pinned if x.is_under(q)]
            for p in holders:
                for s, t in moved:
                    ctx.edges[(p.extend(s.path[n:]), t)] = None
                for x in marks:
                    ctx.pinned[p.extend(x.path[n:])] = None
    elif isinstance(instr, DerefPin):
        for r in resolve_all(ctx, instr.ref):
            for t in ctx.borrows(r):
                ctx.pinned[t] = None
                if kind == lb.PIN_ONLY:
                    ctx.hit = True
    elif isinstance(instr, DerefMove):
        for r in resolve_all(ctx, instr.ref):
            for t in ctx.borrows(r):
                if kind in (lb.PIN_THEN_ANY, lb.PIN_THEN_MOVE) and any(
                        x.is_under(t) for x in ctx.pinned):
                    ctx.hit = True
    elif isinstance(instr, Forget):
        for p in resolve_all(ctx, instr.place):
            if kind == lb.FORGET_ONLY or (
                    kind in (lb.PIN_THEN_ANY, lb.PIN_THEN_FORGET) and p in ctx.pinned):
                ctx.hit = True


_WRITERS = (Borrow, Bind, DerefPin)
# instructions that can set the relaxed hit flag for each goal family
_TRIGGERS = {
    lb.PIN_THEN_ANY: (DerefMove, Forget),
    lb.PIN_THEN_MOVE: DerefMove,
    lb.PIN_THEN_FORGET: Forget,
    lb.PIN_ONLY: DerefPin,
    lb.FORGET_ONLY: Forget,
}


def _over_depth(ctx: Context, cap: int) -> bool:
    for s, t in ctx.edges:
        if len(s.path) > cap or len(t.path) > cap:
            return True
    return any(len(p.path) > cap for p in ctx.states)


# -- the search --------------------------------------------------------------

class _Search:
    def __init__(self, db: FunctionDb, goal: Goal, strategy: Strategy,
                 budget: Budget, limits: Limits):
        self.db = db
        self.goal = goal
        self.strategy = Strategy(strategy)
        self.budget = budget
        self.limits = limits
        # hits are tracked for the goal regardless of pruning; only the
        # lower bound is switched off
        self.hit_kind = goal.bound_kind
        self.kind = self.hit_kind if limits.goal_pruning else lb.NO_BOUND
        self.bound = lb.LowerBound(db, self.kind, limits.max_type_height)
        self.specs = list(db)
        self._params = {s.name: instantiate(s.scheme, tag="p")[0] for s in self.specs}
        self._match: Dict[tuple, bool] = {}
        self._types: Dict[tuple, Optional[Type]] = {}
        self._bodies: Dict[Statement, list] = {}
        self._triggering: Optional[List[FunctionSpec]] = None
        self.stubs = 0
        self.total_stubs = 0
        self.started = time.perf_counter()
        self.deadline = self.started + budget.timeout_secs

    # typing ---------------------------------------------------------------

    def _param_ok(self, spec: FunctionSpec, i: int, t: Type) -> bool:
        key = (spec.name, i, t)
        ok = self._match.get(key)
        if ok is None:
            try:
                unify(self._params[spec.name][i], t)
                ok = True
            except UnificationError:
                ok = False
            self._match[key] = ok
        return ok

    def _ret_type(self, spec: FunctionSpec, arg_types: Tuple[Type, ...], ret: str) -> Optional[Type]:
        key = (spec.name, arg_types, ret)
        if key not in self._types:
            try:
                t = call_type(spec, arg_types, ret)
                self._types[key] = t if height(t) <= self.limits.max_type_height else None
            except ExecutionError:
                self._types[key] = None
        return self._types[key]

    def body(self, stmt: Statement) -> list:
        b = self._bodies.get(stmt)
        if b is None:
            spec = self.db[stmt.fn]
            b = self._bodies[stmt] = substitute(spec.variants[stmt.variant], stmt.ret, stmt.args)
        return b

    def execute(self, ctx: Context, stmt: Statement, rt: Optional[Type] = None) -> Context:
        if rt is None:
            for a in stmt.args:
                info = ctx.vars.get(a)
                if info is None or not info.alive:
                    raise ExecutionError(f"dead or undefined variable {a}")
            rt = self._ret_type(self.db[stmt.fn], tuple(ctx.vars[a].type for a in stmt.args),
                                stmt.ret)
            if rt is None:
                raise ExecutionError("ill-typed or over the height cap")
        return exec_statement(ctx, stmt, self.db, ret_type=rt, body=self.body(stmt))

    def candidates(self, var_types: Sequence[Tuple[str, Type]], ret: str,
                   specs: Optional[Sequence[FunctionSpec]] = None
                   ) -> Iterator[Tuple[Statement, Type]]:
        """Well-typed statements defining ``ret`` over the given variables."""
        for spec in self.specs if specs is None else specs:
            options = []
            for i in range(spec.arity):
                opts = [(n, t) for n, t in var_types if self._param_ok(spec, i, t)]
                if not opts:
                    break
                options.append(opts)
            else:
                for combo in itertools.product(*options):
                    args = tuple(n for n, _ in combo)
                    rt = self._ret_type(spec, tuple(t for _, t in combo), ret)
                    if rt is None:
                        continue
                    for vi in range(len(spec.variants)):
                        yield Statement(ret, spec.name, args, vi), rt

    # budget ---------------------------------------------------------------

    def _tick(self):
        self.stubs += 1
        self.total_stubs += 1
        if self.total_stubs > self.budget.max_stubs:
            raise _Stop("stub budget exhausted")
        if self.total_stubs % 512 == 0 and time.perf_counter() > self.deadline:
            raise _Stop("time budget exhausted")

    # eager ----------------------------------------------------------------

    def eager_children(self, ctx: Context, depth: int) -> Iterator[Tuple[Statement, Context]]:
        ret = f"v{depth + 1}"
        alive = [(n, info.type) for n, info in ctx.vars.items() if info.alive]
        for stmt, rt in self.candidates(alive, ret):
            try:
                nxt = self.execute(ctx, stmt, rt)
            except ExecutionError:
                continue
            if _over_depth(nxt, self.limits.max_path_depth):
                continue
            yield stmt, nxt

    def eager_bound(self, ctx: Context, remaining: int) -> float:
        if self.kind == lb.NO_BOUND:
            return 0
        if self.goal.satisfied(ctx):
            return 0
        alive = [info.type for info in ctx.vars.values() if info.alive]
        pinned = [p for p, st in ctx.states.items() if st is State.PINNED]
        roots = {n: info.type for n, info in ctx.vars.items()}
        return self.bound.level(alive, ctx.edges, pinned, roots, False, remaining)

    def run_eager(self, n: int, collect: bool) -> List[Tuple[Program, Context]]:
        found: List[Tuple[Program, Context]] = []
        path: List[Statement] = []

        def dfs(ctx: Context, depth: int) -> bool:
            remaining = n - depth
            for stmt, nxt in self.eager_children(ctx, depth):
                self._tick()
                path.append(stmt)
                if remaining == 1:
                    if self.goal.satisfied(nxt):
                        found.append((tuple(path), nxt))
                        if not collect:
                            return True
                elif self.eager_bound(nxt, remaining - 1) <= remaining - 1:
                    if dfs(nxt, depth + 1):
                        return True
                path.pop()
            return False

        dfs(Context(), 0)
        return found

    # lazy -----------------------------------------------------------------

    def lazy_children(self, ctx: _LazyCtx, depth: int, last: bool = False
                      ) -> Iterator[Tuple[Statement, _LazyCtx]]:
        ret = f"v{depth + 1}"
        trigger = _TRIGGERS.get(self.hit_kind)
        specs = None
        if last and trigger and not ctx.hit:
            specs = self._trigger_specs(trigger)
        for stmt, rt in self.candidates(list(ctx.types.items()), ret, specs):
            body = self.body(stmt)
            if last and trigger and not ctx.hit and not any(isinstance(i, trigger) for i in body):
                continue  # cannot reach the goal on this line
            # edges and pin marks are shared until a body writes them
            writes = any(isinstance(i, _WRITERS) for i in body)
            nxt = _LazyCtx(dict(ctx.types), dict(ctx.edges) if writes else ctx.edges,
                           dict(ctx.pinned) if writes else ctx.pinned, ctx.hit)
            nxt.types[ret] = rt
            try:
                for instr in body:
                    _lazy_step(nxt, instr, self.hit_kind)
            except ExecutionError:
                continue
            yield stmt, nxt

    def _trigger_specs(self, trigger) -> List[FunctionSpec]:
        if self._triggering is None:
            self._triggering = [s for s in self.specs
                                if any(isinstance(i, trigger) for v in s.variants for i in v)]
        return self._triggering

    def lazy_bound(self, ctx: _LazyCtx, remaining: int) -> float:
        if self.kind == lb.NO_BOUND or ctx.hit:
            return 0
        return self.bound.level(ctx.types.values(), ctx.edges, ctx.pinned, ctx.types,
                                ctx.hit, remaining)

    def run_lazy(self, n: int, collect: bool) -> List[Tuple[Program, Context]]:
        found: List[Tuple[Program, Context]] = []
        path: List[Statement] = []
        # eager contexts for the current path, filled on demand at leaves;
        # None marks a prefix that failed validation
        checked: List[Optional[Context]] = [Context()]

        def validate() -> Optional[Context]:
            k = len(checked) - 1
            while k < len(path):
                prev = checked[k]
                if prev is None:
                    return None
                try:
                    nxt = self.execute(prev, path[k])
                    if _over_depth(nxt, self.limits.max_path_depth):
                        nxt = None
                except ExecutionError:
                    nxt = None
                checked.append(nxt)
                k += 1
            return checked[len(path)]

        def dfs(ctx: _LazyCtx, depth: int) -> bool:
            remaining = n - depth
            for stmt, nxt in self.lazy_children(ctx, depth, last=remaining == 1):
                self._tick()
                path.append(stmt)
                del checked[depth + 1:]
                if remaining == 1:
                    # a relaxed hit is necessary for the goal, so most leaves
                    # are rejected without interpreting them
                    if self.hit_kind != lb.NO_BOUND and not nxt.hit:
                        path.pop()
                        continue
                    final = validate()
                    if final is not None and self.goal.satisfied(final):
                        found.append((tuple(path), final))
                        if not collect:
                            return True
                elif self.lazy_bound(nxt, remaining - 1) <= remaining - 1:
                    if dfs(nxt, depth + 1):
                        return True
                path.pop()
                del checked[depth + 1:]
            return False

        dfs(_LazyCtx(), 0)
        return found

    def run(self, n: int, collect: bool) -> List[Tuple[Program, Context]]:
        self.stubs = 0
        if self.strategy is Strategy.EAGER:
            return self.run_eager(n, collect)
        return self.run_lazy(n, collect)


class _Stop(Exception):
    pass


# -- public operations -------------------------------------------------------

def enumerate_statements(ctx: Context, db: FunctionDb, next_var: str,
                         strategy: Strategy = Strategy.EAGER,
                         limits: Limits = Limits()) -> Iterator[Tuple[Statement, Context]]:
    """Statements defining ``next_var`` that pass the strategy's checks.

    Under ``LAZY`` dead arguments are allowed here (their rejection is
    deferred), so the yielded context is computed without the liveness rule.
    """
    search = _Search(db, ViolationGoal(), strategy, Budget(), limits)
    if Strategy(strategy) is Strategy.EAGER:
        alive = [(n, info.type) for n, info in ctx.vars.items() if info.alive]
    else:
        alive = [(n, info.type) for n, info in ctx.vars.items()]
    check = Strategy(strategy) is Strategy.EAGER
    for stmt, _ in search.candidates(alive, next_var):
        try:
            nxt = exec_statement(ctx, stmt, db, check_liveness=check)
        except ExecutionError:
            continue
        if check and _over_depth(nxt, limits.max_path_depth):
            continue
        yield stmt, nxt


def synthesize(db: FunctionDb, goal: Goal, max_len: int,
               strategy: Strategy = Strategy.LAZY, budget: Budget = Budget(),
               limits: Limits = Limits(), min_len: int = 1) -> SynthesisReport:
    """Iterative deepening: the first solution at the smallest length wins.

    Raises :class:`BudgetExhausted` (carrying the partial report) when the
    time or stub budget runs out before the search space is exhausted.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    search = _Search(db, goal, strategy, budget, limits)
    report = SynthesisReport(goal, Strategy(strategy), max_len)
    try:
        for n in range(min_len, max_len + 1):
            t0 = time.perf_counter()
            stats = LengthStats(n)
            report.per_length.append(stats)
            report.length_reached = n
            try:
                found = search.run(n, collect=False)
            finally:
                stats.stubs = search.stubs
                stats.seconds = time.perf_counter() - t0
                report.stubs_explored = search.total_stubs
            if found:
                prog, final = found[0]
                stats.solutions = 1
                report.found = prog
                report.witness = goal.witness(final)
                break
    except _Stop as stop:
        report.exhausted = str(stop)
        report.wall_time = time.perf_counter() - search.started
        raise BudgetExhausted(str(stop), report) from None
    report.wall_time = time.perf_counter() - search.started
    return report


def all_solutions(db: FunctionDb, goal: Goal, exact_len: int,
                  strategy: Strategy = Strategy.LAZY, budget: Budget = Budget(),
                  limits: Limits = Limits()) -> List[Program]:
    if exact_len < 1:
        raise ValueError("exact_len must be at least 1")
    search = _Search(db, goal, strategy, budget, limits)
    try:
        return [prog for prog, _ in search.run(exact_len, collect=True)]
    except _Stop as stop:
        report = SynthesisReport(goal, Strategy(strategy), exact_len,
                                 length_reached=exact_len, stubs_explored=search.total_stubs,
                                 exhausted=str(stop))
        raise BudgetExhausted(str(stop), report) from None


def emit_program(program: Sequence[Statement], db: FunctionDb,
                 style: str = "pseudocode") -> str:
    """Render as ``let mut vN = f(args);`` lines. The annotated style adds a
    dashed rule followed by ``line N: <instantiated RPIL>`` for every line."""
    if style not in ("pseudocode", "annotated"):
        raise ValueError(f"unknown style {style!r}")
    lines = [f"let mut {s.ret} = {s.fn}({', '.join(s.args)});" for s in program]
    if style == "pseudocode" or not lines:
        return "\n".join(lines)
    lines.append("-" * max(len(l) for l in lines))
    for i, stmt in enumerate(program, 1):
        body = substitute(db[stmt.fn].variants[stmt.variant], stmt.ret, stmt.args)
        lines.append(f"line {i}: {render_body(body)}")
    return "\n".join(lines)
