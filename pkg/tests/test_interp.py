import json

import pytest
from hypothesis import given, strategies as st

from rpilcheck.instructions import Bind, Borrow, DerefMove, DerefPin, Forget
from rpilcheck.interp import (
    Context, DeadVariable, IllTyped, IllegalTransition, ProgramError, State, Statement,
    TRANSITIONS, UnresolvedDeref, VarInfo, apply_instruction, exec_statement, final_context,
    interpret, parse_program, render_trace, resolve, trace_report, violations,
)
from rpilcheck.places import Place, parse_place
from rpilcheck.typesys import TNamed

from support import corpus_db, corpus_text

P = parse_place
A = TNamed("A")

GOLDEN = """\
line 1: { }
line 2: { v2->v1 }
line 3: { v2->v1, v2[2][1]->v2[1] }
line 4: { v2->v1, v2[2][1]->v2[1], v1:pinned }
line 5: { v2->v1, v2[2][1]->v2[1], v1:pinned }
line 6: { v2->v1, v2[2][1]->v2[1], v1:pinned_moved }"""


def ctx_with(edges=(), states=None, names=("v1", "v2", "v3", "v4")):
    return Context({n: VarInfo(A, True) for n in names},
                   {(P(s), P(t)): None for s, t in edges},
                   {P(p): st for p, st in (states or {}).items()})


def test_golden_trace():
    trace = interpret(parse_program(corpus_text("selfref.prog")), corpus_db("selfref.rpil"))
    assert render_trace(trace) == GOLDEN
    assert violations(trace[-1]) == [(Place("v1"), State.PINNED_MOVED)]


def test_usage_example_forward():
    prog = parse_program("v1 = SelfRef::new()\nv2 = borrow_mut(v1)\n"
                         "v3 = mylib::pin_new(v2)\nv4 = deref_move(v2)\n")
    ctx = final_context(prog, corpus_db("selfref_min.rpil"))
    assert ctx.borrows(Place("v2")) == [Place("v1")]
    assert ctx.state(Place("v1")) is State.PINNED_MOVED


def test_moveit_program_moves_pinned_value_on_line_8():
    trace = interpret(parse_program(corpus_text("moveit.prog")), corpus_db("moveit.rpil"))
    assert len(trace) == 8
    assert not violations(trace[6])
    assert violations(trace[7]) == [(P("v2[1]"), State.PINNED_MOVED)]


def test_rio_program_forgets_pinned_completion():
    trace = interpret(parse_program(corpus_text("rio.prog")), corpus_db("rio.rpil"))
    assert len(trace) == 12
    assert violations(trace[-1]) == [(Place("v9"), State.PINNED_FORGOTTEN)]
    assert trace[-2].state(Place("v9")) is State.PINNED


def test_empty_program():
    assert interpret((), corpus_db("selfref.rpil")) == []
    assert final_context((), corpus_db("selfref.rpil")) == Context()


# -- resolution and single instructions --------------------------------------

def test_resolve_examples():
    assert resolve(ctx_with([("v2", "v1")]), P("(*v2)")) == P("v1")
    assert resolve(ctx_with(), P("v1[2]")) == P("v1[2]")
    assert resolve(ctx_with([("v4", "v3")]), P("(*v4)[1]")) == P("v3[1]")
    with pytest.raises(UnresolvedDeref):
        resolve(ctx_with(), P("(*v1)"))


def test_instruction_examples():
    assert list(apply_instruction(ctx_with(), Borrow(P("v2"), P("v1"))).edges) == [(P("v2"), P("v1"))]
    out = apply_instruction(ctx_with([("v2[1]", "v1")]), Bind(P("v3"), P("v2")))
    assert (P("v3[1]"), P("v1")) in out.edges
    moved = apply_instruction(ctx_with([("v2", "v1")], {"v1": State.PINNED}), DerefMove(P("v2")))
    assert moved.state(P("v1")) is State.PINNED_MOVED


def test_move_propagates_to_pinned_sub_places():
    ctx = ctx_with([("v2", "v1")], {"v1[1]": State.PINNED})
    assert apply_instruction(ctx, DerefMove(P("v2"))).state(P("v1[1]")) is State.PINNED_MOVED


def test_pin_is_idempotent_and_forget_transitions():
    ctx = ctx_with([("v2", "v1")], {"v1": State.PINNED})
    assert apply_instruction(ctx, DerefPin(P("v2"))).states == ctx.states
    assert apply_instruction(ctx, Forget(P("v1"))).state(P("v1")) is State.PINNED_FORGOTTEN
    assert apply_instruction(ctx_with(), Forget(P("v1"))).state(P("v1")) is State.FORGOTTEN


@pytest.mark.parametrize("state, instr", [
    (State.FORGOTTEN, DerefPin(P("v2"))),
    (State.FORGOTTEN, DerefMove(P("v2"))),
    (State.FORGOTTEN, Forget(P("v1"))),
    (State.PINNED_MOVED, Forget(P("v1"))),
    (State.PINNED_FORGOTTEN, DerefPin(P("v2"))),
])
def test_illegal_transitions(state, instr):
    with pytest.raises(IllegalTransition):
        apply_instruction(ctx_with([("v2", "v1")], {"v1": state}), instr)


# -- statements --------------------------------------------------------------

def test_liveness_bookkeeping():
    db = corpus_db("selfref.rpil")
    ctx = Context()
    for s in ["v1 = SelfRef::new()", "v2 = borrow_mut(v1)"]:
        ctx = exec_statement(ctx, parse_program(s)[0], db)
    assert ctx.alive("v1")  # borrowing does not consume
    ctx = exec_statement(ctx, Statement("v3", "forget", ("v1",)), db)
    assert not ctx.alive("v1")
    assert not ctx.edges  # v2->v1 retracted
    with pytest.raises(DeadVariable):
        exec_statement(ctx, Statement("v4", "borrow", ("v1",)), db)


def test_statement_errors():
    db = corpus_db("selfref.rpil")
    ctx = exec_statement(Context(), Statement("v1", "SelfRef::new"), db)
    with pytest.raises(IllTyped):
        exec_statement(ctx, Statement("v2", "SelfRef::validate", ("v1",)), db)
    with pytest.raises(DeadVariable, match="dead or undefined variable v9"):
        exec_statement(ctx, Statement("v2", "borrow", ("v9",)), db)
    with pytest.raises(ProgramError) as info:
        interpret(parse_program("v1 = SelfRef::new()\nv2 = borrow(v9)\n"), db)
    assert info.value.line == 2


def test_json_report():
    prog = parse_program(corpus_text("selfref.prog"))
    report = trace_report(prog, interpret(prog, corpus_db("selfref.rpil")))
    json.dumps(report)
    assert report["violations"] == [["v1", "pinned_moved"]]
    assert report["lines"][2]["edges"] == [["v2", "v1"], ["v2[2][1]", "v2[1]"]]
    assert report["error"] is None


def test_program_parser_accepts_let_style():
    prog = parse_program("let mut v1 = rio::new();\nlet mut v2 = io::Result::unwrap(v1); // x\n")
    assert [str(s) for s in prog] == ["v1 = rio::new()", "v2 = io::Result::unwrap(v1)"]


# -- properties --------------------------------------------------------------

NAMES = ["v1", "v2", "v3"]
plain = st.builds(Place, st.sampled_from(NAMES),
                  st.lists(st.integers(1, 2), max_size=2).map(tuple))
edge_sets = st.lists(st.tuples(plain, plain), max_size=6)


def brute_bind(edges, p, q):
    out = set(edges)
    n = len(q.path)
    for s, t in edges:
        if s.root == q.root and s.path[:n] == q.path:
            out.add((Place(p.root, p.path + s.path[n:]), t))
    return out


@given(edge_sets, plain, plain)
def test_bind_transfer_matches_brute_force(edges, p, q):
    ctx = Context({n: VarInfo(A, True) for n in NAMES}, {e: None for e in edges}, {})
    out = apply_instruction(ctx, Bind(p, q))
    assert set(out.edges) == brute_bind(edges, p, q)


def _random_program(rng, db, length):
    prog = []
    for i in range(1, length + 1):
        spec = rng.choice(list(db))
        args = tuple(f"v{rng.randint(1, i - 1)}" for _ in range(spec.arity)) if i > 1 else ()
        if len(args) != spec.arity:
            spec = next(s for s in db if s.arity == 0)
            args = ()
        prog.append(Statement(f"v{i}", spec.name, args, rng.randrange(len(spec.variants))))
    return prog


@given(st.randoms(use_true_random=False), st.integers(1, 6))
def test_state_monotonicity_and_edge_hygiene(rng, length):
    from support import random_db
    db = random_db(rng)
    ctx = Context()
    history = []
    for stmt in _random_program(rng, db, length):
        try:
            ctx = exec_statement(ctx, stmt, db)
        except Exception:
            break
        history.append(ctx)
    for before, after in zip([Context()] + history, history):
        for place in set(before.states) | set(after.states):
            a, b = before.state(place), after.state(place)
            assert a == b or (a, b) in TRANSITIONS
        dead = {n for n, v in after.vars.items() if not v.alive}
        assert all(s.root not in dead and t.root not in dead for s, t in after.edges)
