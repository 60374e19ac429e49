"""RPIL instructions and their textual form."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

from .places import Place, parse_place


@dataclass(frozen=True)
class Borrow:
    """``lhs`` now references ``rhs``."""

    lhs: Place
    rhs: Place


@dataclass(frozen=True)
class Bind:
    """References held by ``rhs`` are also held by ``lhs``."""

    lhs: Place
    rhs: Place


@dataclass(frozen=True)
class DerefPin:
    ref: Place


@dataclass(frozen=True)
class DerefMove:
    ref: Place


@dataclass(frozen=True)
class Forget:
    place: Place


Instruction = Union[Borrow, Bind, DerefPin, DerefMove, Forget]

MNEMONICS = {
    Borrow: "BORROW",
    Bind: "BIND",
    DerefPin: "DEREF-PIN",
    DerefMove: "DEREF-MOVE",
    Forget: "FORGET",
}
_BY_MNEMONIC = {v: k for k, v in MNEMONICS.items()}
_BINARY = (Borrow, Bind)


class InstructionSyntaxError(ValueError):
    pass


def operands(instr: Instruction) -> Tuple[Place, ...]:
    if isinstance(instr, _BINARY):
        return (instr.lhs, instr.rhs)
    if isinstance(instr, Forget):
        return (instr.place,)
    return (instr.ref,)


def map_places(instr: Instruction, fn: Callable[[Place], Place]) -> Instruction:
    return type(instr)(*(fn(p) for p in operands(instr)))


def render_instruction(instr: Instruction) -> str:
    ops = ", ".join(str(p) for p in operands(instr))
    return f"{MNEMONICS[type(instr)]}({ops});"


def render_body(body: Sequence[Instruction]) -> str:
    """Empty bodies render as a lone ``;``."""
    if not body:
        return ";"
    return " ".join(render_instruction(i) for i in body)


_CALL = re.compile(r"\s*(BORROW|BIND|DEREF-PIN|DEREF-MOVE|FORGET)\s*\(")


def parse_body(text: str) -> List[Instruction]:
    """Parse a semicolon-terminated instruction sequence; ``;`` alone is empty."""
    body: List[Instruction] = []
    pos = 0
    stripped = text.strip()
    if stripped in ("", ";"):
        return body
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return body
        m = _CALL.match(text, pos)
        if not m:
            raise InstructionSyntaxError(f"expected instruction at offset {pos}: {text[pos:pos + 20]!r}")
        kind = _BY_MNEMONIC[m.group(1)]
        # operands may themselves contain parentheses, e.g. (*v4)[1]
        depth, i = 1, m.end()
        while i < len(text) and depth:
            if text[i] == "(":
                depth += 1
            elif text[i] == ")":
                depth -= 1
            i += 1
        if depth:
            raise InstructionSyntaxError(f"unbalanced parentheses in {text!r}")
        args = _split_top(text[m.end():i - 1])
        want = 2 if kind in _BINARY else 1
        if len(args) != want:
            raise InstructionSyntaxError(
                f"{m.group(1)} takes {want} operand(s), got {len(args)}")
        try:
            places = [parse_place(a) for a in args]
        except ValueError as exc:
            raise InstructionSyntaxError(str(exc)) from exc
        body.append(kind(*places))
        while i < len(text) and text[i].isspace():
            i += 1
        if i >= len(text) or text[i] != ";":
            raise InstructionSyntaxError(f"missing ';' after {m.group(1)} at offset {i}")
        pos = i + 1


def _split_top(text: str) -> List[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    tail = text[start:].strip()
    if tail or parts:
        parts.append(tail)
    return parts
