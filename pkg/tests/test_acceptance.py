"""The eight acceptance criteria, one test each.

Each test records a PASS/FAIL line; conftest prints them at the end of the run.
"""

import random
import time

import pytest

from rpilcheck.instructions import Bind, Borrow, DerefMove, DerefPin, Forget, render_body
from rpilcheck.interp import (
    Context, ExecutionError, State, TRANSITIONS, VarInfo, apply_instruction, interpret,
    parse_program, render_trace, resolve_all, retract_dead, violations,
)
from rpilcheck.mirlite import parse_mirlite, translate
from rpilcheck.places import DEREF, Place
from rpilcheck.synth import (
    BorrowGoal, StateGoal, Strategy, ViolationGoal, all_solutions, synthesize,
)
from rpilcheck.typesys import TNamed

from support import (
    consistent_programs, corpus_db, corpus_text, has_edge, has_state, is_violation,
    oracle_solutions, random_db, render_programs,
)

RESULTS = {}
CORPUS = ["selfref.rpil", "selfref_min.rpil", "moveit.rpil", "rio.rpil"]


@pytest.fixture
def criterion(request):
    """Record the outcome of the calling test under a numbered label."""
    label = request.node.get_closest_marker("criterion").args[0]
    RESULTS[label] = "FAIL"
    details = []
    yield details
    if request.node.rep_call.failed:
        return
    RESULTS[label] = "PASS" + (f" ({'; '.join(details)})" if details else "")


@pytest.mark.criterion("1 golden trace")
def test_c1_golden_trace(criterion):
    t0 = time.perf_counter()
    trace = interpret(parse_program(corpus_text("selfref.prog")), corpus_db("selfref.rpil"))
    rendered = render_trace(trace).splitlines()
    assert len(rendered) == 6
    assert rendered[-1] == "line 6: { v2->v1, v2[2][1]->v2[1], v1:pinned_moved }"
    assert rendered[:3] == ["line 1: { }", "line 2: { v2->v1 }",
                            "line 3: { v2->v1, v2[2][1]->v2[1] }"]
    elapsed = time.perf_counter() - t0
    assert elapsed < 1
    criterion.append(f"{elapsed * 1000:.1f} ms")


@pytest.mark.criterion("2 synthesis goldens")
def test_c2_synthesis_goldens(criterion):
    db = corpus_db("selfref_min.rpil")
    t0 = time.perf_counter()
    sols = all_solutions(db, BorrowGoal(Place("v2"), Place("v1")), 2)
    assert render_programs(sols) == ["v1 = SelfRef::new(); v2 = borrow(v1)",
                                     "v1 = SelfRef::new(); v2 = borrow_mut(v1)"]
    report = synthesize(db, ViolationGoal(), 8)
    assert [str(s) for s in report.found] == [
        "v1 = SelfRef::new()", "v2 = borrow_mut(v1)", "v3 = mylib::pin_new(v2)",
        "v4 = deref_move(v2)"]
    assert report.witness == Place("v1")
    assert [s.solutions for s in report.per_length] == [0, 0, 0, 1]
    elapsed = time.perf_counter() - t0
    assert elapsed < 10
    criterion.append(f"{elapsed:.2f} s")


@pytest.mark.slow
@pytest.mark.criterion("3 moveit move-after-pin")
def test_c3_moveit(criterion):
    db = corpus_db("moveit.rpil")
    report = synthesize(db, StateGoal(State.PINNED_MOVED), 8, Strategy.LAZY)
    assert report.found is not None and len(report.found) == 8
    assert [s.solutions for s in report.per_length[:7]] == [0] * 7
    assert violations(interpret(report.found, db)[-1])[0][1] is State.PINNED_MOVED
    assert report.wall_time < 30 * 60
    criterion.append(f"length 8 in {report.wall_time:.1f} s, {report.stubs_explored} stubs")


@pytest.mark.criterion("4 rio pin-and-leak")
def test_c4_rio(criterion):
    db = corpus_db("rio.rpil")
    report = synthesize(db, StateGoal(State.PINNED_FORGOTTEN), 12, Strategy.LAZY)
    assert report.found is not None
    n = len(report.found)
    assert all(s.solutions == 0 for s in report.per_length[:-1])
    final = interpret(report.found, db)[-1]
    witness = report.witness
    assert final.state(witness) is State.PINNED_FORGOTTEN
    assert final.vars[witness.root].type.head == "Completion"
    assert report.found[-1].fn == "mem::forget"
    assert report.wall_time < 60 * 60
    criterion.append(f"length {n} in {report.wall_time:.2f} s, witness {witness}")


@pytest.mark.slow
@pytest.mark.criterion("5 oracle equivalence")
def test_c5_oracle_equivalence(criterion):
    goals = [(ViolationGoal(), is_violation),
             (StateGoal(State.PINNED), has_state(State.PINNED)),
             (StateGoal(State.FORGOTTEN), has_state(State.FORGOTTEN)),
             (BorrowGoal(Place("v2"), Place("v1")), has_edge("v2", "v1"))]
    checks = nonempty = 0
    for seed in range(120):
        db = random_db(random.Random(seed))
        runs = list(consistent_programs(db, 3))
        for goal, holds in goals:
            for n in (1, 2, 3):
                want = oracle_solutions(db, holds, n, runs)
                assert all_solutions(db, goal, n) == want, (seed, goal, n)
                checks += 1
                nonempty += bool(want)
    criterion.append(f"120 dbs, {checks} comparisons, {nonempty} with solutions")


@pytest.mark.slow
@pytest.mark.criterion("6 strategy agreement and direction")
def test_c6_strategy_agreement(criterion):
    wall = {Strategy.EAGER: {}, Strategy.LAZY: {}}
    for n in range(1, 7):
        for name in CORPUS:
            db = corpus_db(name)
            got = {}
            for strategy in Strategy:
                t0 = time.perf_counter()
                got[strategy] = all_solutions(db, ViolationGoal(), n, strategy)
                wall[strategy][n] = wall[strategy].get(n, 0) + time.perf_counter() - t0
            assert got[Strategy.EAGER] == got[Strategy.LAZY], (name, n)
    for n in (5, 6):
        criterion.append(f"len {n}: lazy {wall[Strategy.LAZY][n]:.2f} s "
                         f"vs eager {wall[Strategy.EAGER][n]:.2f} s")
    for n in (5, 6):
        assert wall[Strategy.LAZY][n] <= wall[Strategy.EAGER][n], criterion


@pytest.mark.criterion("7 translation golden")
def test_c7_translation(criterion):
    t0 = time.perf_counter()
    program = parse_mirlite(corpus_text("store_refs.mir"))
    tr = translate(program["store_refs"], program)
    assert [render_body(v) for v in tr.variants] == ["BIND(_0[1][1], _1); BIND(_0[2][1], _2);"]
    assert time.perf_counter() - t0 < 1


NAMES = ("v1", "v2", "v3")


def _random_place(rng, live):
    path = tuple(rng.choice([1, 2, DEREF]) for _ in range(rng.randint(0, 2)))
    return Place(rng.choice(live), path)


def _random_instr(rng, live):
    # statement arguments are always live, so operands are drawn from live names
    kind = rng.choice([Borrow, Bind, DerefPin, DerefMove, Forget])
    if kind in (Borrow, Bind):
        return kind(_random_place(rng, live), _random_place(rng, live))
    return kind(_random_place(rng, live))


def _relocated(ctx, instr, place, state):
    """A BIND holder takes over the state of the value bound into it."""
    if not isinstance(instr, Bind) or ctx.state(place) is not State.INITIAL:
        return False
    return any(place.is_under(p) and ctx.state(q.extend(place.path[len(p.path):])) is state
               for p in resolve_all(ctx, instr.lhs) for q in resolve_all(ctx, instr.rhs))


@pytest.mark.criterion("8 state-machine properties")
def test_c8_state_machine(criterion):
    rng = random.Random(2024)
    terminal = {State.PINNED_MOVED, State.PINNED_FORGOTTEN, State.FORGOTTEN}
    steps = 0
    for _ in range(10_000):
        ctx = Context({n: VarInfo(TNamed("A"), True) for n in NAMES}, {}, {})
        for _ in range(rng.randint(1, 8)):
            live = [n for n in NAMES if ctx.alive(n)]
            if len(live) > 1 and rng.random() < 0.15:
                # consume a variable the way a statement does
                ctx = ctx.copy()
                victim = rng.choice(live)
                ctx.vars[victim] = VarInfo(ctx.vars[victim].type, False)
                retract_dead(ctx)
                live.remove(victim)
            instr = _random_instr(rng, live)
            try:
                nxt = apply_instruction(ctx, instr)
            except ExecutionError:
                continue
            steps += 1
            for place in set(ctx.states) | set(nxt.states):
                a, b = ctx.state(place), nxt.state(place)
                assert a == b or (a, b) in TRANSITIONS or _relocated(ctx, instr, place, b)
                if a in terminal:
                    assert b == a
            dead = {n for n, v in nxt.vars.items() if not v.alive}
            assert not any(s.root in dead or t.root in dead for s, t in nxt.edges)
            ctx = nxt
    criterion.append(f"{steps} executed instructions")
