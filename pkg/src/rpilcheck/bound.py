"""Admissible lower bounds on the lines still needed to reach a goal.

The bound comes from a relaxed reachability analysis: every variable is
abstracted to its type, facts (available types, reference edges, pinned
places) only accumulate, and an instruction whose operand cannot be resolved
simply has no effect. Any concrete continuation of ``k`` lines therefore
reaches the goal fact within ``k`` relaxed layers, so pruning a prefix whose
bound exceeds the remaining length never loses a solution.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .db import FunctionDb
from .instructions import Bind, Borrow, DerefMove, DerefPin, Forget
from .places import DEREF, Place
from .typesys import (
    Type, TVar, UnificationError, apply, apply_signature, free_vars, height, unify,
)

# goal fact needed by each goal family
PIN_THEN_ANY = "violation"
PIN_THEN_MOVE = "moved"
PIN_THEN_FORGET = "pin_forgotten"
PIN_ONLY = "pinned"
FORGET_ONLY = "forgotten"
NO_BOUND = "none"

AbsPlace = Tuple[str, tuple]
INF = math.inf


def type_key(t: Type) -> Tuple[str, Type]:
    """Canonical spelling of ``t`` with variables renamed by first occurrence."""
    names = free_vars(t)
    if names:
        t = apply({n: TVar(f"?{i}") for i, n in enumerate(names)}, t)
    return str(t), t


class Facts:
    __slots__ = ("types", "edges", "pinned", "hit")

    def __init__(self, types: Dict[str, Type], edges: Set[Tuple[AbsPlace, AbsPlace]],
                 pinned: Set[AbsPlace], hit: bool = False):
        self.types = types
        self.edges = edges
        self.pinned = pinned
        self.hit = hit

    def key(self):
        return (frozenset(self.types), frozenset(self.edges), frozenset(self.pinned), self.hit)


def _under(p: AbsPlace, q: AbsPlace) -> bool:
    return p[0] == q[0] and p[1][:len(q[1])] == q[1]


class LowerBound:
    def __init__(self, db: FunctionDb, goal_kind: str, max_type_height: int = 5,
                 max_arg_combos: int = 256):
        self.db = db
        self.kind = goal_kind
        self.max_type_height = max_type_height
        self.max_arg_combos = max_arg_combos
        self._memo: Dict[tuple, float] = {}
        self._ret_cache: Dict[tuple, Optional[Type]] = {}
        self._match_cache: Dict[tuple, bool] = {}
        self.calls = 0

    # -- entry point -----------------------------------------------------

    def level(self, var_types: Iterable[Type], edges: Iterable[Tuple[Place, Place]],
              pinned: Iterable[Place], root_types: Dict[str, Type], hit: bool,
              limit: int) -> float:
        """Relaxed number of further lines needed; ``INF`` if above ``limit``."""
        if self.kind == NO_BOUND or hit:
            return 0
        types: Dict[str, Type] = {}
        for t in var_types:
            k, nt = type_key(t)
            types[k] = nt
        keyed = {name: type_key(t)[0] for name, t in root_types.items()}

        def ab(p: Place) -> AbsPlace:
            return (keyed[p.root], p.path)

        facts = Facts(types, {(ab(s), ab(t)) for s, t in edges}, {ab(p) for p in pinned})
        key = facts.key()
        known = self._memo.get(key)
        if known is not None:
            lvl, checked = known
            if lvl != INF:
                return lvl if lvl <= limit else INF
            if checked >= limit:
                return INF
        self.calls += 1
        lvl = self._layers(facts, limit)
        self._memo[key] = (lvl, limit)
        return lvl if lvl <= limit else INF

    # -- relaxed layers --------------------------------------------------

    def _layers(self, facts: Facts, limit: int) -> float:
        for layer in range(1, limit + 1):
            nxt = self._expand(facts)
            if nxt.hit:
                return layer
            if nxt.key() == facts.key():
                return INF
            facts = nxt
        return INF

    def _matches(self, param: Type, key: str, t: Type) -> bool:
        ck = (param, key)
        hit = self._match_cache.get(ck)
        if hit is None:
            try:
                unify(param, _rename_apart(t))
                hit = True
            except UnificationError:
                hit = False
            self._match_cache[ck] = hit
        return hit

    def _ret_type(self, spec, arg_keys: Tuple[str, ...], arg_types: Sequence[Type]) -> Optional[Type]:
        ck = (spec.name, arg_keys)
        if ck not in self._ret_cache:
            try:
                t = apply_signature(spec.scheme, [_rename_apart(a, i) for i, a in enumerate(arg_types)],
                                    tag="lb")
                self._ret_cache[ck] = t if height(t) <= self.max_type_height else None
            except UnificationError:
                self._ret_cache[ck] = None
        return self._ret_cache[ck]

    def _expand(self, facts: Facts) -> Facts:
        types = dict(facts.types)
        edges = set(facts.edges)
        pinned = set(facts.pinned)
        hit = False
        items = list(facts.types.items())
        for spec in self.db:
            params, _ = spec.scheme.params, spec.scheme.ret
            options: List[List[Tuple[str, Type]]] = []
            for p in params:
                opts = [(k, t) for k, t in items if self._matches(p, k, t)]
                if not opts:
                    break
                options.append(opts)
            else:
                for combo in _bounded_product(options, self.max_arg_combos):
                    if combo is _GENERIC:
                        ret, keys = spec.scheme.ret, None
                    else:
                        keys = tuple(k for k, _ in combo)
                        ret = self._ret_type(spec, keys, [t for _, t in combo])
                    if ret is None:
                        continue
                    rkey, rtype = type_key(ret)
                    types.setdefault(rkey, rtype)
                    if keys is None:
                        # too many combinations: every matching type may fill every slot
                        roots = {"_0": [rkey]}
                        for i, opts in enumerate(options, 1):
                            roots[f"_{i}"] = [k for k, _ in opts]
                    else:
                        roots = {"_0": [rkey]}
                        for i, k in enumerate(keys, 1):
                            roots[f"_{i}"] = [k]
                    for variant in spec.variants:
                        if self._run(variant, roots, facts, edges, pinned):
                            hit = True
        return Facts(types, edges, pinned, hit)

    def _resolve(self, place: Place, roots: Dict[str, List[str]], facts: Facts,
                 edges: Set) -> List[AbsPlace]:
        current = [(r, ()) for r in roots[place.root]]
        for sel in place.path:
            if sel is DEREF:
                current = [t for c in current for (s, t) in edges if s == c]
                if not current:
                    return []
            else:
                current = [(r, path + (sel,)) for r, path in current]
        return current

    def _run(self, variant, roots, facts: Facts, edges: Set, pinned: Set) -> bool:
        # effects are read against the growing sets: still a relaxation
        hit = False
        for instr in variant:
            if isinstance(instr, Borrow):
                for r in self._resolve(instr.lhs, roots, facts, edges):
                    for t in self._resolve(instr.rhs, roots, facts, edges):
                        edges.add((r, t))
            elif isinstance(instr, Bind):
                holders = self._resolve(instr.lhs, roots, facts, edges)
                for q in self._resolve(instr.rhs, roots, facts, edges):
                    n = len(q[1])
                    moved = [(s, t) for (s, t) in edges if _under(s, q)]
                    marks = [x for x in pinned if _under(x, q)]
                    for p in holders:
                        for s, t in moved:
                            edges.add(((p[0], p[1] + s[1][n:]), t))
                        for x in marks:
                            pinned.add((p[0], p[1] + x[1][n:]))
            elif isinstance(instr, DerefPin):
                for r in self._resolve(instr.ref, roots, facts, edges):
                    for (s, t) in list(edges):
                        if s == r:
                            pinned.add(t)
                            if self.kind == PIN_ONLY:
                                hit = True
            elif isinstance(instr, DerefMove):
                if self.kind in (PIN_THEN_ANY, PIN_THEN_MOVE):
                    for r in self._resolve(instr.ref, roots, facts, edges):
                        for (s, t) in list(edges):
                            if s == r and any(_under(x, t) for x in pinned):
                                hit = True
            elif isinstance(instr, Forget):
                for p in self._resolve(instr.place, roots, facts, edges):
                    if self.kind == FORGET_ONLY:
                        hit = True
                    elif self.kind in (PIN_THEN_ANY, PIN_THEN_FORGET) and p in pinned:
                        hit = True
        return hit


_GENERIC = object()


def _bounded_product(options: List[List[Tuple[str, Type]]], cap: int):
    total = 1
    for o in options:
        total *= len(o)
    if total > cap:
        yield _GENERIC
        return
    yield from itertools.product(*options)


def _rename_apart(t: Type, salt: int = 0) -> Type:
    names = free_vars(t)
    if not names:
        return t
    return apply({n: TVar(f"{n}#{salt}") for n in names}, t)
