"""Type terms, parametric schemes and first-order unification.

Surface syntax (as used in function databases)::

    T            single uppercase letter: type variable
    &T, &mut T   shared / mutable reference
    Head<A, B>   named type with parameters (heads may be paths: io::Result)
    ()           unit
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TNamed:
    head: str
    args: Tuple["Type", ...] = ()

    def __post_init__(self):
        if not self.head:
            raise ValueError("empty type head")

    def __str__(self):
        if not self.args:
            return self.head
        return f"{self.head}<{', '.join(map(str, self.args))}>"


@dataclass(frozen=True)
class TRef:
    mutable: bool
    inner: "Type"

    def __str__(self):
        return f"&mut {self.inner}" if self.mutable else f"&{self.inner}"


@dataclass(frozen=True)
class TUnit:
    def __str__(self):
        return "()"


UNIT = TUnit()

Type = Union[TVar, TNamed, TRef, TUnit]
Substitution = Dict[str, Type]


class UnificationError(Exception):
    pass


class TypeClash(UnificationError):
    pass


class OccursCheck(UnificationError):
    pass


class ArityMismatch(UnificationError):
    pass


@dataclass(frozen=True)
class TypeScheme:
    quantified: Tuple[str, ...]
    params: Tuple[Type, ...]
    ret: Type

    @classmethod
    def of(cls, params: Sequence[Type], ret: Type) -> "TypeScheme":
        names: List[str] = []
        for t in list(params) + [ret]:
            for v in free_vars(t):
                if v not in names:
                    names.append(v)
        return cls(tuple(names), tuple(params), ret)

    @property
    def arity(self) -> int:
        return len(self.params)

    def __str__(self):
        return f"({', '.join(map(str, self.params))}) -> {self.ret}"


def free_vars(t: Type) -> List[str]:
    out: List[str] = []

    def walk(t):
        if isinstance(t, TVar):
            if t.name not in out:
                out.append(t.name)
        elif isinstance(t, TNamed):
            for a in t.args:
                walk(a)
        elif isinstance(t, TRef):
            walk(t.inner)

    walk(t)
    return out


def height(t: Type) -> int:
    if isinstance(t, TNamed):
        return 1 + max((height(a) for a in t.args), default=0)
    if isinstance(t, TRef):
        return 1 + height(t.inner)
    return 1


def apply(subst: Substitution, t: Type) -> Type:
    if not subst:
        return t
    if isinstance(t, TVar):
        bound = subst.get(t.name)
        return t if bound is None else apply(subst, bound)
    if isinstance(t, TNamed):
        if not t.args:
            return t
        return TNamed(t.head, tuple(apply(subst, a) for a in t.args))
    if isinstance(t, TRef):
        return TRef(t.mutable, apply(subst, t.inner))
    return t


def _walk(subst: Substitution, t: Type) -> Type:
    while isinstance(t, TVar) and t.name in subst:
        t = subst[t.name]
    return t


def _occurs(name: str, t: Type, subst: Substitution) -> bool:
    t = _walk(subst, t)
    if isinstance(t, TVar):
        return t.name == name
    if isinstance(t, TNamed):
        return any(_occurs(name, a, subst) for a in t.args)
    if isinstance(t, TRef):
        return _occurs(name, t.inner, subst)
    return False


def unify(a: Type, b: Type, subst: Optional[Substitution] = None) -> Substitution:
    """Most general unifier of ``a`` and ``b``, extending ``subst``.

    The returned mapping is normalized: every bound term is fully resolved,
    so applying it twice equals applying it once.
    """
    s: Substitution = dict(subst) if subst else {}
    _unify(a, b, s)
    return {k: apply(s, v) for k, v in s.items()}


def _unify(a: Type, b: Type, s: Substitution) -> None:
    a, b = _walk(s, a), _walk(s, b)
    if a == b:
        return
    if isinstance(a, TVar):
        if _occurs(a.name, b, s):
            raise OccursCheck(f"{a} occurs in {apply(s, b)}")
        s[a.name] = b
    elif isinstance(b, TVar):
        _unify(b, a, s)
    elif isinstance(a, TNamed) and isinstance(b, TNamed):
        if a.head != b.head or len(a.args) != len(b.args):
            raise TypeClash(f"{a} vs {b}")
        for x, y in zip(a.args, b.args):
            _unify(x, y, s)
    elif isinstance(a, TRef) and isinstance(b, TRef):
        if a.mutable != b.mutable:
            raise TypeClash(f"{a} vs {b}")
        _unify(a.inner, b.inner, s)
    else:
        raise TypeClash(f"{a} vs {b}")


_fresh = itertools.count(1)


def instantiate(scheme: TypeScheme, tag: Optional[str] = None) -> Tuple[Tuple[Type, ...], Type]:
    """Copy the scheme with fresh variables (``tag`` makes names deterministic)."""
    prefix = f"'{tag}" if tag is not None else f"'{next(_fresh)}"
    ren = {q: TVar(f"{q}{prefix}") for q in scheme.quantified}
    return tuple(apply(ren, p) for p in scheme.params), apply(ren, scheme.ret)


def apply_signature(scheme: TypeScheme, arg_types: Sequence[Type], tag: Optional[str] = None) -> Type:
    """Type of ``f(args)``; raises :class:`UnificationError` if ill-typed."""
    if len(arg_types) != scheme.arity:
        raise ArityMismatch(f"expected {scheme.arity} argument(s), got {len(arg_types)}")
    params, ret = instantiate(scheme, tag)
    s: Substitution = {}
    for p, a in zip(params, arg_types):
        _unify(p, a, s)
    return apply(s, ret)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(::|&|<|>|,|\(|\)|[A-Za-z_][A-Za-z0-9_']*)")


class TypeSyntaxError(ValueError):
    pass


def _tokens(text: str) -> List[str]:
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise TypeSyntaxError(f"bad type syntax at offset {pos}: {text!r}")
        toks.append(m.group(1))
        pos = m.end()
    return toks


def parse_type(text: str) -> Type:
    toks = _tokens(text)
    t, i = _parse_type(toks, 0, text)
    if i != len(toks):
        raise TypeSyntaxError(f"trailing tokens in type {text!r}")
    return t


def _parse_type(toks: List[str], i: int, text: str) -> Tuple[Type, int]:
    if i >= len(toks):
        raise TypeSyntaxError(f"unexpected end of type {text!r}")
    tok = toks[i]
    if tok == "&":
        mutable = i + 1 < len(toks) and toks[i + 1] == "mut"
        inner, j = _parse_type(toks, i + 2 if mutable else i + 1, text)
        return TRef(mutable, inner), j
    if tok == "(":
        if i + 1 < len(toks) and toks[i + 1] == ")":
            return UNIT, i + 2
        raise TypeSyntaxError(f"tuples are not supported: {text!r}")
    if not (tok[0].isalpha() or tok[0] == "_"):
        raise TypeSyntaxError(f"unexpected {tok!r} in {text!r}")
    head, i = tok, i + 1
    while i + 1 < len(toks) and toks[i] == "::":
        head += "::" + toks[i + 1]
        i += 2
    args: List[Type] = []
    if i < len(toks) and toks[i] == "<":
        i += 1
        while True:
            a, i = _parse_type(toks, i, text)
            args.append(a)
            if i < len(toks) and toks[i] == ",":
                i += 1
                continue
            if i < len(toks) and toks[i] == ">":
                i += 1
                break
            raise TypeSyntaxError(f"expected ',' or '>' in {text!r}")
    if not args and re.fullmatch(r"[A-Z]", head):
        return TVar(head), i
    return TNamed(head, tuple(args)), i


def split_top(text: str, sep: str = ",") -> List[str]:
    """Split on ``sep`` outside any bracket nesting."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "<([{":
            depth += 1
        elif ch in ">)]}":
            if ch == ">" and i > 0 and text[i - 1] == "-":
                continue
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    tail = text[start:].strip()
    if tail or parts:
        parts.append(tail)
    return parts


def render_types(ts: Iterable[Type]) -> str:
    return ", ".join(map(str, ts))
