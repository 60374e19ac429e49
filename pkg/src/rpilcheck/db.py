"""Function specifications and the line-oriented database format.

A database file looks like::

    #defaults on
    fn mylib::pin_new(&mut T) -> Pin<&mut T>
      variant { DEREF-PIN(_1); }
    fn SelfRef::new() -> SelfRef
      variant { ; }

``consumes: _1, _2`` lists parameters whose argument dies after the call;
parameters not listed stay alive. Lines starting with ``#`` other than the
``#defaults`` pragma are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .instructions import (
    Borrow, DerefMove, Forget, Instruction, InstructionSyntaxError,
    map_places, operands, parse_body, render_body,
)
from .places import Place
from .typesys import (
    TRef, TVar, TypeScheme, TypeSyntaxError, UNIT, parse_type, split_top,
)

Variant = Tuple[Instruction, ...]

LIBRARY = "library"
BUILTIN = "builtin"

_PARAM_ROOT = re.compile(r"_(\d+)$")


class DatabaseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    scheme: TypeScheme
    variants: Tuple[Variant, ...]
    consumes: Tuple[bool, ...]
    kind: str = LIBRARY

    def __post_init__(self):
        if len(self.consumes) != self.scheme.arity:
            raise DatabaseError(
                f"{self.name}: {len(self.consumes)} consume flag(s) for arity {self.scheme.arity}")
        if not self.variants:
            raise DatabaseError(f"{self.name}: needs at least one variant")
        for variant in self.variants:
            for instr in variant:
                for place in operands(instr):
                    m = _PARAM_ROOT.match(place.root)
                    if not m or int(m.group(1)) > self.arity:
                        raise DatabaseError(
                            f"{self.name}: undeclared root {place.root!r} in a variant")

    @property
    def arity(self) -> int:
        return self.scheme.arity

    def render(self) -> str:
        params = ", ".join(str(p) for p in self.scheme.params)
        lines = [f"fn {self.name}({params}) -> {self.scheme.ret}"]
        consumed = [f"_{i + 1}" for i, c in enumerate(self.consumes) if c]
        if consumed:
            lines.append(f"  consumes: {', '.join(consumed)}")
        for variant in self.variants:
            lines.append(f"  variant {{ {render_body(variant)} }}")
        return "\n".join(lines)


def _builtin(name: str, param, ret, body: Variant, consumes: bool) -> FunctionSpec:
    return FunctionSpec(name, TypeScheme.of([param], ret), (body,), (consumes,), BUILTIN)


_T = TVar("T")
_R0, _R1 = Place("_0"), Place("_1")

BUILTINS: Tuple[FunctionSpec, ...] = (
    _builtin("borrow", _T, TRef(False, _T), (Borrow(_R0, _R1),), False),
    _builtin("borrow_mut", _T, TRef(True, _T), (Borrow(_R0, _R1),), False),
    # the reference survives the move: the traced pin example keeps v2->v1
    _builtin("deref_move", TRef(True, _T), UNIT, (DerefMove(_R1),), False),
    _builtin("forget", _T, UNIT, (Forget(_R1),), True),
)


@dataclass
class FunctionDb:
    specs: List[FunctionSpec] = field(default_factory=list)
    defaults: bool = False

    def __post_init__(self):
        self._index: Dict[str, FunctionSpec] = {}
        for spec in self.specs:
            if spec.name in self._index:
                raise DatabaseError(f"duplicate function {spec.name!r}")
            self._index[spec.name] = spec

    @classmethod
    def from_specs(cls, specs: Sequence[FunctionSpec], defaults: bool = True) -> "FunctionDb":
        specs = list(specs)
        if defaults:
            specs += [b for b in BUILTINS if b.name not in {s.name for s in specs}]
        return cls(specs, defaults)

    def __getitem__(self, name: str) -> FunctionSpec:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown function {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[FunctionSpec]:
        return iter(self.specs)

    def __len__(self) -> int:
        return len(self.specs)

    def __eq__(self, other) -> bool:
        return isinstance(other, FunctionDb) and self.specs == other.specs

    @property
    def library(self) -> List[FunctionSpec]:
        return [s for s in self.specs if s.kind == LIBRARY]

    def select(self, names: Optional[Sequence[str]] = None, limit: int = 10) -> "FunctionDb":
        """Keep at most ``limit`` library functions (first in file order by
        default) plus every builtin."""
        lib = self.library
        if names is None:
            chosen = lib[:limit]
        else:
            if len(names) > limit:
                raise DatabaseError(f"at most {limit} functions may be selected")
            missing = [n for n in names if n not in self._index]
            if missing:
                raise DatabaseError(f"unknown function(s): {', '.join(missing)}")
            wanted = set(names)
            chosen = [s for s in lib if s.name in wanted]
        builtins = [s for s in self.specs if s.kind == BUILTIN]
        return FunctionDb(chosen + builtins, self.defaults)

    def render(self) -> str:
        out = [f"#defaults {'on' if self.defaults else 'off'}"]
        builtin_names = {b.name for b in BUILTINS} if self.defaults else set()
        for spec in self.specs:
            if spec.kind == BUILTIN and spec.name in builtin_names:
                continue
            out.append(spec.render())
        return "\n".join(out) + "\n"


def substitute(variant: Sequence[Instruction], ret: str, args: Sequence[str],
               arity: Optional[int] = None) -> List[Instruction]:
    """Replace ``_0`` with ``ret`` and ``_i`` with ``args[i-1]``."""
    if arity is not None and len(args) != arity:
        raise DatabaseError(f"expected {arity} argument(s), got {len(args)}")
    names = {"_0": ret}
    for i, a in enumerate(args, 1):
        names[f"_{i}"] = a

    def rename(p: Place) -> Place:
        try:
            return p.with_root(names[p.root])
        except KeyError:
            raise DatabaseError(f"no argument for placeholder {p.root}") from None

    return [map_places(instr, rename) for instr in variant]


# -- parsing -----------------------------------------------------------------

_HEADER = re.compile(r"fn\s+(.+)$")
_VARIANT = re.compile(r"variant\s*\{(.*)\}\s*$")
_CONSUMES = re.compile(r"consumes\s*:\s*(.*)$")
_PRAGMA = re.compile(r"#\s*defaults\s+(on|off)\s*$")


def _split_signature(text: str, line: int) -> Tuple[str, List[str], str]:
    # name ends at the first '(' (names like `<_ as m::Tr>::f` have none)
    open_at = text.find("(")
    if open_at <= 0:
        raise DatabaseError(f"malformed signature {text!r}", line)
    depth = 0
    for close_at in range(open_at, len(text)):
        ch = text[close_at]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                break
    else:
        raise DatabaseError(f"unbalanced parameter list in {text!r}", line)
    name = text[:open_at].strip()
    params = split_top(text[open_at + 1:close_at])
    rest = text[close_at + 1:].strip()
    if rest.startswith("->"):
        ret = rest[2:].strip()
    elif rest == "":
        ret = "()"
    else:
        raise DatabaseError(f"expected '->' after parameters in {text!r}", line)
    return name, params, ret


def parse_function_db(text: str) -> FunctionDb:
    defaults = False
    entries: List[dict] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        m = _PRAGMA.match(line)
        if m:
            defaults = m.group(1) == "on"
            continue
        if line.startswith("#") or line.startswith("//"):
            continue
        m = _HEADER.match(line)
        if m:
            name, params, ret = _split_signature(m.group(1), lineno)
            try:
                ptypes = [parse_type(p) for p in params]
                rtype = parse_type(ret)
            except TypeSyntaxError as exc:
                raise DatabaseError(str(exc), lineno) from exc
            entries.append(dict(name=name, params=ptypes, ret=rtype,
                                consumes=set(), variants=[], line=lineno))
            continue
        if not entries:
            raise DatabaseError(f"content before first 'fn': {line!r}", lineno)
        cur = entries[-1]
        m = _CONSUMES.match(line)
        if m:
            for tok in split_top(m.group(1)):
                pm = _PARAM_ROOT.match(tok)
                if not pm or not 1 <= int(pm.group(1)) <= len(cur["params"]):
                    raise DatabaseError(f"{cur['name']}: cannot consume {tok!r}", lineno)
                cur["consumes"].add(int(pm.group(1)))
            continue
        m = _VARIANT.match(line)
        if m:
            try:
                cur["variants"].append(tuple(parse_body(m.group(1))))
            except InstructionSyntaxError as exc:
                raise DatabaseError(f"{cur['name']}: {exc}", lineno) from exc
            continue
        raise DatabaseError(f"unrecognized line {line!r}", lineno)

    specs: List[FunctionSpec] = []
    seen = set()
    for e in entries:
        if e["name"] in seen:
            raise DatabaseError(f"duplicate function {e['name']!r}", e["line"])
        seen.add(e["name"])
        variants = tuple(e["variants"]) or ((),)
        consumes = tuple(i + 1 in e["consumes"] for i in range(len(e["params"])))
        try:
            specs.append(FunctionSpec(e["name"], TypeScheme.of(e["params"], e["ret"]),
                                      variants, consumes))
        except DatabaseError as exc:
            raise DatabaseError(str(exc), e["line"]) from exc
    return FunctionDb.from_specs(specs, defaults)
