"""Translation of a small textual mid-level IR into RPIL function variants.

Input looks like::

    #[unsafe_block]
    pub fn store_refs(_1: &mut T, _2: &mut T) -> RefStore<T> {
      bb0: {
        _3 = Option::Some(copy _1);
        _4 = Option::Some(copy _2);
        _0 = RefStore { store1: move _3, store2: move _4 };
        return;
      }
    }

Places use the RPIL spelling (``_3[1]``, ``(*_1)[2]``; fields are 1-based).
Terminators are ``return;``, ``goto bbN;``, ``switch [bbA, bbB, ...];`` and
``_d = call path::f(ops) -> bbN;``.

Every control-flow path through a function, with callees inlined, becomes one
variant. Locals are tracked abstractly: a local holds either "the value found
at outer place X" or "a reference to outer place X" at some sub-path. Only
writes that land on a place visible to the caller (the return slot, a
parameter, or anything reached through a dereference) emit instructions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .db import FunctionDb, FunctionSpec, Variant
from .instructions import (
    Bind, Borrow, DerefMove, DerefPin, Forget, Instruction, InstructionSyntaxError,
    parse_body,
)
from .places import DEREF, Place, PlaceSyntaxError, parse_place
from .typesys import TRef, TNamed, TUnit, Type, TypeScheme, TypeSyntaxError, parse_type, split_top


class MirError(ValueError):
    pass


class MirSyntaxError(MirError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# -- syntax tree -------------------------------------------------------------

@dataclass(frozen=True)
class Operand:
    mode: str            # "copy" | "move" | "const"
    place: Optional[Place] = None

    def __str__(self):
        return self.mode if self.place is None else f"{self.mode} {self.place}"


@dataclass(frozen=True)
class Use:
    operand: Operand


@dataclass(frozen=True)
class RefOf:
    mutable: bool
    place: Place


@dataclass(frozen=True)
class Aggregate:
    ctor: str
    fields: Tuple[Operand, ...]


Rvalue = Union[Use, RefOf, Aggregate]


@dataclass(frozen=True)
class Assign:
    dst: Place
    rhs: Rvalue


@dataclass(frozen=True)
class Call:
    dst: Optional[Place]
    callee: str
    args: Tuple[Operand, ...]
    next: str


@dataclass(frozen=True)
class Goto:
    target: str


@dataclass(frozen=True)
class Switch:
    targets: Tuple[str, ...]


@dataclass(frozen=True)
class Return:
    pass


Terminator = Union[Call, Goto, Switch, Return]


@dataclass
class Block:
    name: str
    statements: List[Assign]
    terminator: Terminator


@dataclass
class MirFunction:
    name: str
    params: List[Type]
    ret: Type
    blocks: Dict[str, Block]
    public: bool = True
    unsafe_fn: bool = False
    unsafe_block: bool = False
    line: int = 0

    @property
    def entry(self) -> str:
        return next(iter(self.blocks))

    @property
    def arity(self) -> int:
        return len(self.params)


# -- parsing -----------------------------------------------------------------

# positional constructors known without a declaration
BUILTIN_CTORS: Dict[str, int] = {
    "Some": 1, "Option::Some": 1, "None": 0, "Option::None": 0,
    "Ok": 1, "Result::Ok": 1, "Err": 1, "Result::Err": 1,
}

_FN = re.compile(r"((?:pub|unsafe)\s+)*fn\s+(.+?)\s*\{$")
_BLOCK = re.compile(r"(bb\d+)\s*:\s*\{$")
_LET = re.compile(r"let\s+(mut\s+)?_\d+\s*:.*$")
_STRUCT_NAMED = re.compile(r"struct\s+([\w:]+)\s*(<[^{]*>)?\s*\{(.*)\}$")
_STRUCT_TUPLE = re.compile(r"struct\s+([\w:]+)\s*(<.*?>)?\s*\((.*)\)$")
_CTOR = re.compile(r"ctor\s+([\w:]+)\s*/\s*(\d+)$")
_CALL = re.compile(r"(?:(.+?)\s*=\s*)?call\s+(.+?)\s*\((.*)\)\s*->\s*(bb\d+)$")
_GOTO = re.compile(r"goto\s*(?:->\s*)?(bb\d+)$")
_SWITCH = re.compile(r"switch\s*\[(.*)\]$")
_NAMED_AGG = re.compile(r"([A-Za-z][\w:]*)\s*\{(.*)\}$")
_POS_AGG = re.compile(r"([A-Za-z][\w:]*)\s*\((.*)\)$")
_UNIT_CTOR = re.compile(r"[A-Za-z][\w:]*$")


@dataclass
class MirProgram:
    functions: List[MirFunction]
    ctors: Dict[str, int]
    fields: Dict[str, List[str]]

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, name: str) -> MirFunction:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def get(self, name: str) -> Optional[MirFunction]:
        try:
            return self[name]
        except KeyError:
            return None


def _place(text: str, line: int) -> Place:
    try:
        return parse_place(text.strip())
    except (PlaceSyntaxError, ValueError) as exc:
        raise MirSyntaxError(str(exc), line) from None


def _operand(text: str, line: int) -> Operand:
    text = text.strip()
    if text.startswith("const"):
        return Operand("const")
    for mode in ("copy", "move"):
        if text.startswith(mode + " "):
            return Operand(mode, _place(text[len(mode):], line))
    return Operand("copy", _place(text, line))


def _rvalue(text: str, line: int, prog: MirProgram) -> Rvalue:
    text = text.strip()
    if text.startswith("&"):
        rest = text[1:].strip()
        mutable = rest.startswith("mut ")
        return RefOf(mutable, _place(rest[4:] if mutable else rest, line))
    if text.startswith(("copy ", "move ", "const")) or text.startswith("_") or text.startswith("(*"):
        return Use(_operand(text, line))
    if text.startswith("("):
        # tuple aggregate
        return Aggregate("(..)", tuple(_operand(p, line) for p in split_top(text[1:-1]) if p))
    m = _NAMED_AGG.match(text)
    if m:
        ctor = m.group(1)
        named = []
        for item in split_top(m.group(2)):
            if not item:
                continue
            name, sep, op = item.partition(":")
            if not sep:
                raise MirSyntaxError(f"expected 'field: operand' in {text!r}", line)
            named.append((name.strip(), _operand(op, line)))
        order = prog.fields.get(ctor)
        if order is not None:
            if sorted(order) != sorted(n for n, _ in named):
                raise MirSyntaxError(f"fields of {ctor} are {', '.join(order)}", line)
            lookup = dict(named)
            return Aggregate(ctor, tuple(lookup[n] for n in order))
        return Aggregate(ctor, tuple(op for _, op in named))
    m = _POS_AGG.match(text)
    if m or _UNIT_CTOR.match(text):
        ctor = m.group(1) if m else text
        ops = tuple(_operand(p, line) for p in split_top(m.group(2)) if p) if m else ()
        if ctor not in prog.ctors:
            raise MirSyntaxError(f"unknown ctor {ctor!r}", line)
        if prog.ctors[ctor] != len(ops):
            raise MirSyntaxError(
                f"ctor {ctor} takes {prog.ctors[ctor]} field(s), got {len(ops)}", line)
        return Aggregate(ctor, ops)
    raise MirSyntaxError(f"cannot parse rvalue {text!r}", line)


def _type(text: str, line: int) -> Type:
    try:
        return parse_type(text)
    except TypeSyntaxError as exc:
        raise MirSyntaxError(str(exc), line) from None


def _header(text: str, line: int):
    open_at = text.find("(")
    if open_at <= 0:
        raise MirSyntaxError(f"malformed fn header {text!r}", line)
    depth = 0
    for close_at in range(open_at, len(text)):
        depth += {"(": 1, ")": -1}.get(text[close_at], 0)
        if depth == 0:
            break
    else:
        raise MirSyntaxError("unbalanced parameter list", line)
    name = text[:open_at].strip()
    params = []
    for i, p in enumerate(split_top(text[open_at + 1:close_at]), 1):
        if not p:
            continue
        local, sep, ty = p.partition(":")
        if not sep or local.strip() != f"_{i}":
            raise MirSyntaxError(f"parameter {i} must be declared as _{i}: TYPE", line)
        params.append(_type(ty.strip(), line))
    rest = text[close_at + 1:].strip()
    ret = _type(rest[2:].strip(), line) if rest.startswith("->") else TUnit()
    return name, params, ret


def _terminator(text: str, line: int, prog: MirProgram) -> Optional[Terminator]:
    if text == "return":
        return Return()
    m = _GOTO.match(text)
    if m:
        return Goto(m.group(1))
    m = _SWITCH.match(text)
    if m:
        targets = tuple(t.strip() for t in m.group(1).split(",") if t.strip())
        if len(targets) < 2:
            raise MirSyntaxError("switch needs at least two successors", line)
        return Switch(targets)
    m = _CALL.match(text)
    if m:
        dst = _place(m.group(1), line) if m.group(1) else None
        args = tuple(_operand(a, line) for a in split_top(m.group(3)) if a)
        return Call(dst, m.group(2).strip(), args, m.group(4))
    return None


def parse_mirlite(text: str) -> MirProgram:
    """Parse a MIR-lite file; block references are checked per function."""
    prog = MirProgram([], dict(BUILTIN_CTORS), {})
    fn: Optional[MirFunction] = None
    block: Optional[Block] = None
    pending_unsafe = False
    for lineno, line in _logical_lines(text):
        if fn is None:
            if line == "#[unsafe_block]":
                pending_unsafe = True
                continue
            if line.startswith("#"):
                continue
            m = _FN.match(line)
            if m:
                mods = line[:line.index("fn")].split()
                name, params, ret = _header(m.group(2), lineno)
                fn = MirFunction(name, params, ret, {}, public="pub" in mods,
                                 unsafe_fn="unsafe" in mods, unsafe_block=pending_unsafe,
                                 line=lineno)
                pending_unsafe = False
                continue
            line = line.rstrip(";")
            m = _STRUCT_NAMED.match(line)
            if m:
                names = [f.split(":")[0].strip() for f in split_top(m.group(3)) if f.strip()]
                prog.fields[m.group(1)] = names
                continue
            m = _STRUCT_TUPLE.match(line)
            if m:
                prog.ctors[m.group(1)] = len([f for f in split_top(m.group(3)) if f.strip()])
                continue
            m = _CTOR.match(line)
            if m:
                prog.ctors[m.group(1)] = int(m.group(2))
                continue
            raise MirSyntaxError(f"expected a fn, struct or ctor declaration: {line!r}", lineno)

        if block is None:
            if line == "}":
                _finish(fn, lineno)
                prog.functions.append(fn)
                fn = None
                continue
            if _LET.match(line.rstrip(";")):
                continue
            m = _BLOCK.match(line)
            if not m:
                raise MirSyntaxError(f"expected 'bbN: {{' or '}}': {line!r}", lineno)
            if m.group(1) in fn.blocks:
                raise MirSyntaxError(f"duplicate block {m.group(1)}", lineno)
            block = Block(m.group(1), [], None)  # type: ignore[arg-type]
            continue

        if line == "}":
            if block.terminator is None:
                raise MirSyntaxError(f"{block.name} has no terminator", lineno)
            fn.blocks[block.name] = block
            block = None
            continue
        for part in (p.strip() for p in line.split(";")):
            if not part:
                continue
            if block.terminator is not None:
                raise MirSyntaxError(f"statement after the terminator of {block.name}", lineno)
            term = _terminator(part, lineno, prog)
            if term is not None:
                block.terminator = term
                continue
            dst, sep, rhs = part.partition("=")
            if not sep:
                raise MirSyntaxError(f"cannot parse statement {part!r}", lineno)
            block.statements.append(Assign(_place(dst, lineno), _rvalue(rhs, lineno, prog)))
        if not line.endswith(";"):
            raise MirSyntaxError(f"missing ';' in {line!r}", lineno)
    if fn is not None:
        raise MirSyntaxError(f"unterminated fn {fn.name}")
    if not any(f.public for f in prog.functions):
        # no visibility markers at all: everything is exported
        for f in prog.functions:
            f.public = True
    return prog


_ONE_LINE_BLOCK = re.compile(r"(bb\d+\s*:\s*\{)(.*)\}$")


def _logical_lines(text: str):
    # `bbN: { a; b; }` on one line is split into open, body and close
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        m = _ONE_LINE_BLOCK.match(line)
        if m:
            yield lineno, m.group(1)
            if m.group(2).strip():
                yield lineno, m.group(2).strip()
            yield lineno, "}"
        else:
            yield lineno, line


def _finish(fn: MirFunction, line: int) -> None:
    if not fn.blocks:
        raise MirSyntaxError(f"{fn.name}: no basic blocks", line)
    for b in fn.blocks.values():
        t = b.terminator
        targets = (t.next,) if isinstance(t, Call) else (t.target,) if isinstance(t, Goto) else \
            t.targets if isinstance(t, Switch) else ()
        for target in targets:
            if target not in fn.blocks:
                raise MirSyntaxError(f"{fn.name}: {b.name} jumps to undefined block {target}", line)


# -- intrinsics --------------------------------------------------------------

DEFAULT_INTRINSICS = """\
Pin::new_unchecked => DEREF-PIN(_1);
pin::Pin::new_unchecked => DEREF-PIN(_1);
core::pin::Pin::new_unchecked => DEREF-PIN(_1);
mem::swap => DEREF-MOVE(_1); DEREF-MOVE(_2);
core::mem::swap => DEREF-MOVE(_1); DEREF-MOVE(_2);
mem::replace => DEREF-MOVE(_1); BIND(_0, (*_1)); BIND((*_1), _2);
core::mem::replace => DEREF-MOVE(_1); BIND(_0, (*_1)); BIND((*_1), _2);
mem::forget => FORGET(_1);
core::mem::forget => FORGET(_1);
Option::unwrap => BIND(_0, _1[1]);
Result::unwrap => BIND(_0, _1[1]);
"""


def parse_intrinsics(text: str) -> Dict[str, Tuple[Instruction, ...]]:
    """``path => BODY`` lines; ``#`` starts a comment line."""
    table: Dict[str, Tuple[Instruction, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, body = line.partition("=>")
        if not sep or not name.strip():
            raise MirSyntaxError(f"expected 'path => TEMPLATE': {line!r}", lineno)
        try:
            table[name.strip()] = tuple(parse_body(body))
        except InstructionSyntaxError as exc:
            raise MirSyntaxError(str(exc), lineno) from None
    return table


def intrinsic_arity(template: Sequence[Instruction]) -> int:
    from .instructions import operands
    roots = [int(p.root[1:]) for i in template for p in operands(i)]
    return max(roots, default=0)


# -- abstract frames ---------------------------------------------------------

# what a local holds at some sub-path: the value at an outer place, or a
# reference to an outer place
VALUE, REF = "value", "ref"
Source = Tuple[str, Place]
Contents = List[Tuple[tuple, Source]]


class PathDropped(Exception):
    pass


@dataclass
class Frame:
    fn_name: str
    home: Dict[str, Place]                        # caller-visible locals
    held: Dict[str, Contents] = field(default_factory=dict)
    moved: set = field(default_factory=set)
    dst: Optional[Place] = None                   # caller place receiving _0
    resume: Optional[str] = None                  # caller block to continue at
    uid: int = 0

    def copy(self) -> "Frame":
        return Frame(self.fn_name, self.home, {k: list(v) for k, v in self.held.items()},
                     set(self.moved), self.dst, self.resume, self.uid)


def _prefix_entry(entries: Contents, path: tuple):
    best = None
    for key, src in entries:
        if path[:len(key)] == key and (best is None or len(key) >= len(best[0])):
            best = (key, src)
    return best


def locate(frame: Frame, place: Place) -> Optional[Place]:
    """The caller-visible place denoted by ``place``, if any."""
    if place.root in frame.home:
        return frame.home[place.root].extend(place.path)
    entry = _prefix_entry(frame.held.get(place.root, []), place.path)
    if entry is None:
        return None
    key, (kind, x) = entry
    rest = place.path[len(key):]
    if kind == VALUE and DEREF in rest:
        return x.extend(rest)
    if kind == REF and rest and rest[0] is DEREF:
        return x.extend(rest[1:])
    return None


def contents(frame: Frame, place: Place) -> Contents:
    if place.root in frame.moved:
        raise PathDropped(f"use of moved local {place.root}")
    loc = locate(frame, place)
    if loc is not None:
        return [((), (VALUE, loc))]
    entries = frame.held.get(place.root, [])
    out: Contents = []
    entry = _prefix_entry(entries, place.path)
    if entry is not None:
        key, (kind, x) = entry
        rest = place.path[len(key):]
        if kind == VALUE:
            out.append(((), (VALUE, x.extend(rest))))
        elif not rest:
            out.append(((), (REF, x)))
    n = len(place.path)
    for key, src in entries:
        if len(key) > n and key[:n] == place.path:
            out.append((key[n:], src))
    return out


class _Walker:
    """One path's translation state; copied at every fork."""

    def __init__(self, frames: List[Frame], out: List[Instruction], visits: Dict, next_uid: int):
        self.frames = frames
        self.out = out
        self.visits = visits
        self.next_uid = next_uid

    def fork(self) -> "_Walker":
        return _Walker([f.copy() for f in self.frames], list(self.out), dict(self.visits),
                       self.next_uid)

    @property
    def top(self) -> Frame:
        return self.frames[-1]

    def read(self, frame: Frame, op: Operand) -> Contents:
        if op.place is None:
            return []
        value = contents(frame, op.place)
        if op.mode == "move" and not op.place.path:
            frame.moved.add(op.place.root)
        return value

    def assign(self, frame: Frame, dst: Place, value: Contents) -> None:
        loc = locate(frame, dst)
        if loc is not None:
            for suffix, (kind, x) in value:
                target = loc.extend(suffix)
                self.out.append(Bind(target, x) if kind == VALUE else Borrow(target, x))
            return
        if DEREF in dst.path:
            return  # write through an untracked reference
        frame.moved.discard(dst.root)
        n = len(dst.path)
        kept = [(k, s) for k, s in frame.held.get(dst.root, []) if k[:n] != dst.path]
        frame.held[dst.root] = kept + [(dst.path + suffix, src) for suffix, src in value]

    def ref_place(self, frame: Frame, place: Place) -> Place:
        """A caller-visible place holding a reference equal to ``place``'s value."""
        value = contents(frame, place)
        for suffix, (kind, x) in value:
            if suffix:
                continue
            if kind == VALUE:
                return x
            if x.path and x.path[-1] is DEREF:
                return Place(x.root, x.path[:-1])  # reborrow of *y is y
            raise PathDropped(f"reference to {x} has no caller-visible name")
        raise PathDropped(f"{place} does not hold a tracked reference")

    def value_place(self, frame: Frame, place: Place) -> Optional[Place]:
        for suffix, (kind, x) in contents(frame, place):
            if not suffix and kind == VALUE:
                return x
        return None

    def run_template(self, template: Sequence[Instruction], args: List[Contents],
                     dst: Optional[Place]) -> None:
        caller = self.top
        frame = Frame("<intrinsic>", {}, {f"_{i}": [(k, s) for k, s in v]
                                           for i, v in enumerate(args, 1)})
        for instr in template:
            if isinstance(instr, Bind):
                self.assign(frame, instr.lhs, contents(frame, instr.rhs))
            elif isinstance(instr, Borrow):
                loc = locate(frame, instr.rhs)
                self.assign(frame, instr.lhs, [((), (REF, loc))] if loc is not None else [])
            elif isinstance(instr, DerefPin):
                self.out.append(DerefPin(self.ref_place(frame, instr.ref)))
            elif isinstance(instr, DerefMove):
                self.out.append(DerefMove(self.ref_place(frame, instr.ref)))
            elif isinstance(instr, Forget):
                target = self.value_place(frame, instr.place)
                if target is not None:
                    self.out.append(Forget(target))
        if dst is not None:
            self.assign(caller, dst, contents(frame, Place("_0")))

    def statement(self, stmt: Assign) -> None:
        frame = self.top
        rhs = stmt.rhs
        if isinstance(rhs, Use):
            self.assign(frame, stmt.dst, self.read(frame, rhs.operand))
        elif isinstance(rhs, RefOf):
            if rhs.place.root in frame.moved:
                raise PathDropped(f"borrow of moved local {rhs.place.root}")
            loc = locate(frame, rhs.place)
            self.assign(frame, stmt.dst, [((), (REF, loc))] if loc is not None else [])
        else:
            # one atomic assignment per field
            values = [self.read(frame, op) for op in rhs.fields]
            if locate(frame, stmt.dst) is None and DEREF not in stmt.dst.path:
                self.assign(frame, stmt.dst, [])
            for i, value in enumerate(values, 1):
                self.assign(frame, stmt.dst.index(i), value)


@dataclass
class Translation:
    function: str
    variants: List[Variant]
    dropped: List[str] = field(default_factory=list)


def translate(fn: MirFunction, program: Union[MirProgram, Sequence[MirFunction]],
              intrinsics: Optional[Dict[str, Sequence[Instruction]]] = None,
              max_inline_depth: int = 8, max_visits: int = 2) -> Translation:
    """Enumerate the function's paths depth-first; one variant per path that
    reaches the outermost ``return`` within the caps."""
    if intrinsics is None:
        intrinsics = parse_intrinsics(DEFAULT_INTRINSICS)
    functions = {f.name: f for f in program}
    home = {f"_{i}": Place(f"_{i}") for i in range(fn.arity + 1)}
    start = _Walker([Frame(fn.name, home)], [], {}, 1)
    result = Translation(fn.name, [])
    work: List[Tuple[_Walker, str]] = [(start, fn.entry)]
    while work:
        walker, block_name = work.pop()
        try:
            succ = _step(walker, block_name, functions, intrinsics, max_inline_depth, max_visits)
        except PathDropped as exc:
            result.dropped.append(str(exc))
            continue
        if succ is None:
            result.variants.append(tuple(walker.out))
            continue
        forks = [(walker if i == 0 else walker.fork(), b) for i, b in enumerate(succ)]
        # first-listed successor is explored first
        work.extend(reversed([(w, b) for w, b in forks]))
    return result


def _step(walker: _Walker, block_name: str, functions, intrinsics, max_depth, max_visits):
    """Run one block; return successor block names, or None once finished."""
    while True:
        frame = walker.top
        fn = functions[frame.fn_name]
        key = (frame.uid, block_name)
        walker.visits[key] = walker.visits.get(key, 0) + 1
        if walker.visits[key] > max_visits:
            raise PathDropped(f"{fn.name}: loop cap exceeded at {block_name}")
        block = fn.blocks[block_name]
        for stmt in block.statements:
            walker.statement(stmt)
        term = block.terminator
        if isinstance(term, Goto):
            block_name = term.target
            continue
        if isinstance(term, Switch):
            return list(term.targets)
        if isinstance(term, Return):
            if len(walker.frames) == 1:
                return None
            done = walker.frames.pop()
            if done.dst is not None:
                walker.assign(walker.top, done.dst, contents(done, Place("_0")))
            block_name = done.resume
            continue
        # call
        args = [walker.read(frame, op) for op in term.args]
        template = intrinsics.get(term.callee)
        if template is not None:
            if intrinsic_arity(template) > len(args):
                raise MirError(f"intrinsic {term.callee} expects {intrinsic_arity(template)} "
                               f"argument(s), got {len(args)}")
            walker.run_template(template, args, term.dst)
            block_name = term.next
            continue
        callee = functions.get(term.callee)
        if callee is None:
            raise MirError(f"{fn.name}: unknown callee {term.callee!r}")
        if len(args) != callee.arity:
            raise MirError(f"{fn.name}: {callee.name} takes {callee.arity} argument(s)")
        if len(walker.frames) > max_depth:
            raise PathDropped(f"{fn.name}: inline depth cap {max_depth} exceeded")
        held = {f"_{i}": list(v) for i, v in enumerate(args, 1)}
        walker.frames.append(Frame(callee.name, {}, held, set(), term.dst, term.next,
                                   walker.next_uid))
        walker.next_uid += 1
        block_name = callee.entry


# -- export ------------------------------------------------------------------

COPY_TYPES = frozenset(
    "u8 u16 u32 u64 u128 usize i8 i16 i32 i64 i128 isize bool char f32 f64".split())


def _is_copy(t: Type) -> bool:
    return isinstance(t, (TRef, TUnit)) or (isinstance(t, TNamed) and not t.args
                                            and t.head in COPY_TYPES)


def to_spec(fn: MirFunction, translation: Translation) -> FunctionSpec:
    if not translation.variants:
        why = f" ({'; '.join(translation.dropped)})" if translation.dropped else ""
        raise MirError(f"{fn.name}: no variant survives the caps{why}")
    variants: List[Variant] = []
    for v in translation.variants:
        if v not in variants:
            variants.append(v)
    consumes = tuple(not _is_copy(t) for t in fn.params)
    return FunctionSpec(fn.name, TypeScheme.of(fn.params, fn.ret), tuple(variants), consumes)


def export_function_db(fns: Sequence[MirFunction], translations: Dict[str, Translation],
                       defaults: bool = True) -> str:
    """Database text for the public functions, in the given order."""
    exported = [f for f in fns if f.public]
    bad = [f.name for f in exported if not translations[f.name].variants]
    if bad:
        raise MirError(f"no variant survives the caps for: {', '.join(bad)}")
    specs = [to_spec(f, translations[f.name]) for f in exported]
    return FunctionDb.from_specs(specs, defaults).render()


def publish_order(fns: Sequence[MirFunction]) -> List[MirFunction]:
    """Safe functions wrapping unsafe blocks first, otherwise declaration order."""
    return sorted(fns, key=lambda f: not (f.unsafe_block and not f.unsafe_fn))
