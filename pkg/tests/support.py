"""Brute-force oracles and random generators shared by the test modules.

The oracles deliberately avoid the synthesis engine: they enumerate every
canonical program and run it through the forward interpreter.
"""

from __future__ import annotations

import itertools
import random
from importlib.resources import files
from typing import Callable, Iterator, List, Sequence, Tuple

from rpilcheck.db import FunctionDb, FunctionSpec, parse_function_db
from rpilcheck.instructions import Bind, Borrow, DerefMove, DerefPin, Forget
from rpilcheck.interp import Context, ExecutionError, State, Statement, exec_statement
from rpilcheck.places import DEREF, Place
from rpilcheck.typesys import TNamed, TRef, TVar, TypeScheme, UNIT, height

MAX_DEPTH = 4
MAX_HEIGHT = 5


def corpus_text(name: str) -> str:
    return files("rpilcheck.corpus").joinpath(name).read_text()


def corpus_db(name: str) -> FunctionDb:
    return parse_function_db(corpus_text(name))


# -- program oracle ----------------------------------------------------------

def within_caps(ctx: Context) -> bool:
    places = [p for e in ctx.edges for p in e] + list(ctx.states)
    if any(len(p.path) > MAX_DEPTH for p in places):
        return False
    return all(height(v.type) <= MAX_HEIGHT for v in ctx.vars.values())


def consistent_programs(db: FunctionDb, max_len: int
                        ) -> Iterator[Tuple[Tuple[Statement, ...], Context]]:
    """Every canonical program of length 1..max_len whose every prefix runs
    without error and stays within the caps, with its final context."""

    def extend(prog, ctx):
        i = len(prog) + 1
        names = [f"v{k}" for k in range(1, i)]
        for spec in db:
            for args in itertools.product(names, repeat=spec.arity):
                for vi in range(len(spec.variants)):
                    stmt = Statement(f"v{i}", spec.name, args, vi)
                    try:
                        nxt = exec_statement(ctx, stmt, db)
                    except ExecutionError:
                        continue
                    if not within_caps(nxt):
                        continue
                    full = prog + (stmt,)
                    yield full, nxt
                    if i < max_len:
                        yield from extend(full, nxt)

    yield from extend((), Context())


def is_violation(ctx: Context) -> bool:
    return any(st in (State.PINNED_MOVED, State.PINNED_FORGOTTEN) for st in ctx.states.values())


def has_state(state: State) -> Callable[[Context], bool]:
    return lambda ctx: any(st is state for st in ctx.states.values())


def has_edge(src: str, dst: str) -> Callable[[Context], bool]:
    return lambda ctx: (Place(src), Place(dst)) in ctx.edges


def oracle_solutions(db: FunctionDb, holds: Callable[[Context], bool], length: int,
                     runs=None) -> List[Tuple[Statement, ...]]:
    runs = runs if runs is not None else list(consistent_programs(db, length))
    return [p for p, ctx in runs if len(p) == length and holds(ctx)]


# -- random function databases -----------------------------------------------

_T = TVar("T")
PARAM_TYPES = [_T, TRef(False, _T), TRef(True, _T), TNamed("A"), TRef(True, TNamed("A")),
               TNamed("Pin", (TRef(True, _T),)), TNamed("Box", (_T,))]
RET_TYPES = [TNamed("A"), TNamed("B"), _T, TRef(True, _T), TNamed("Pin", (TRef(True, _T),)),
             TNamed("Wrap", (_T,)), UNIT]
SELECTORS = [1, 2, DEREF]


def random_place(rng: random.Random, arity: int, max_depth: int = 2) -> Place:
    root = f"_{rng.randint(0, arity)}"
    depth = 0 if rng.random() < 0.5 else rng.randint(1, max_depth)
    path = tuple(rng.choice(SELECTORS) for _ in range(depth))
    return Place(root, path)


def random_instruction(rng: random.Random, arity: int):
    # pins are weighted up so that violations are reachable often enough
    kind = rng.choice([Borrow, Borrow, Bind, DerefPin, DerefPin, DerefMove, Forget])
    if kind in (Borrow, Bind):
        return kind(random_place(rng, arity), random_place(rng, arity))
    return kind(random_place(rng, arity))


def random_spec(rng: random.Random, name: str, arity: int) -> FunctionSpec:
    params = [rng.choice(PARAM_TYPES) for _ in range(arity)]
    ret = rng.choice(RET_TYPES) if arity else rng.choice([TNamed("A"), TNamed("B")])
    variants = []
    for _ in range(rng.choice([1, 1, 2])):
        variants.append(tuple(random_instruction(rng, arity)
                              for _ in range(rng.randint(0, 2 if arity else 0))))
    consumes = tuple(rng.random() < 0.3 for _ in range(arity))
    return FunctionSpec(name, TypeScheme.of(params, ret), tuple(variants), consumes)


def random_db(rng: random.Random, max_functions: int = 4) -> FunctionDb:
    n = rng.randint(1, max_functions)
    specs = [random_spec(rng, "f1", 0)]
    for i in range(2, n + 1):
        if i == 2 and rng.random() < 0.5:
            # a pinning helper makes violations reachable in short programs
            specs.append(FunctionSpec("f2", TypeScheme.of([TRef(True, _T)], TNamed("Pin", (TRef(True, _T),))),
                                      ((DerefPin(Place("_1")),),), (rng.random() < 0.3,)))
            continue
        specs.append(random_spec(rng, f"f{i}", rng.randint(1, 2)))
    return FunctionDb.from_specs(specs, defaults=rng.random() < 0.8)


def render_programs(progs: Sequence[Sequence[Statement]]) -> List[str]:
    return ["; ".join(map(str, p)) for p in progs]
