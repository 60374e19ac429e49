"""Value locations: a root variable refined by sub-structure indices and derefs.

Grammar::

    place := atom | place '[' int ']'
    atom  := var | '(' '*' place ')'

``my_var[1][2]`` selects field 2 of field 1; ``(*v4)[1]`` selects field 1
of whatever ``v4`` references.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Tuple, Union


class PlaceSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class _DerefSel:
    __slots__ = ()

    def __repr__(self) -> str:
        return "DEREF"

    def __reduce__(self):
        return "DEREF"


DEREF = _DerefSel()

Selector = Union[int, _DerefSel]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True, order=False)
class Place:
    root: str
    path: Tuple[Selector, ...] = ()

    def __post_init__(self):
        for sel in self.path:
            if sel is not DEREF and (not isinstance(sel, int) or sel < 1):
                raise ValueError(f"bad selector {sel!r}: indices are 1-based")

    def __str__(self) -> str:
        return render_place(self)

    def __repr__(self) -> str:
        return f"Place({render_place(self)})"

    def index(self, k: int) -> Place:
        return Place(self.root, self.path + (k,))

    def deref(self) -> Place:
        return Place(self.root, self.path + (DEREF,))

    def extend(self, suffix: Iterable[Selector]) -> Place:
        return Place(self.root, self.path + tuple(suffix))

    @property
    def has_deref(self) -> bool:
        return any(sel is DEREF for sel in self.path)

    def is_under(self, other: Place) -> bool:
        """True when ``other`` is this place or one of its enclosing places."""
        n = len(other.path)
        return self.root == other.root and self.path[:n] == other.path

    def with_root(self, root: str) -> Place:
        return Place(root, self.path)


def render_place(place: Place) -> str:
    text = place.root
    for sel in place.path:
        if sel is DEREF:
            text = f"(*{text})"
        else:
            text = f"{text}[{sel}]"
    return text


def parse_place(text: str) -> Place:
    place, pos = _parse(text, _skip(text, 0))
    pos = _skip(text, pos)
    if pos != len(text):
        raise PlaceSyntaxError("trailing input", text, pos)
    return place


def _skip(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse(text: str, pos: int) -> Tuple[Place, int]:
    if text.startswith("(", pos):
        pos = _skip(text, pos + 1)
        if not text.startswith("*", pos):
            raise PlaceSyntaxError("expected '*'", text, pos)
        inner, pos = _parse(text, _skip(text, pos + 1))
        pos = _skip(text, pos)
        if not text.startswith(")", pos):
            raise PlaceSyntaxError("expected ')'", text, pos)
        place = inner.deref()
        pos += 1
    else:
        m = _IDENT.match(text, pos)
        if not m:
            raise PlaceSyntaxError("expected variable", text, pos)
        place = Place(m.group(0))
        pos = m.end()
    while True:
        look = _skip(text, pos)
        if not text.startswith("[", look):
            return place, pos
        m = re.compile(r"\s*(\d+)\s*\]").match(text, look + 1)
        if not m:
            raise PlaceSyntaxError("expected index", text, look + 1)
        k = int(m.group(1))
        if k < 1:
            raise PlaceSyntaxError("indices start at 1", text, m.start(1))
        place = place.index(k)
        pos = m.end()
