"""Group words over named generators.

Accepted syntax: juxtaposition for products, ``^-1``/``⁻¹`` and integer
powers (``a^3``, ``a^{-2}``, ``a²``, ``c⁻³``), conjugation ``w^u`` where
``u`` is a generator or a parenthesised word, commutators ``[u,v]`` meaning
``u^-1 v^-1 u v``, parentheses, and ``1`` for the identity.  Generator names are matched greedily by length, so ``acb`` reads
as ``a c b`` when those are the declared names.

Conjugation is ``w^u = u w u^-1``.  With the composition convention
``(fg)(v) = f(g(v))`` this is the form under which the relator
``(ca^-1)^a (ca^-1)^3`` of automaton 2294 holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .automaton import ParseError

_SUP = {"⁰": "0", "¹": "1", "²": "2", "³": "3", "⁴": "4", "⁵": "5",
        "⁶": "6", "⁷": "7", "⁸": "8", "⁹": "9", "⁻": "-"}

Letter = tuple[int, int]  # (generator index, +1 or -1)


def free_reduce(letters) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def invert(letters) -> tuple[Letter, ...]:
    return tuple((g, -e) for g, e in reversed(letters))


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word; ``names`` gives the generator alphabet."""

    names: tuple[str, ...]
    letters: tuple[Letter, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(self.letters))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        if self.names != other.names:
            raise ValueError("words over different generator sets")
        return GroupWord(self.names, self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(self.names, invert(self.letters))

    def __pow__(self, n: int) -> "GroupWord":
        base = self.letters if n >= 0 else invert(self.letters)
        return GroupWord(self.names, base * abs(n))

    def __str__(self) -> str:
        return format_word(self.names, self.letters)

    @classmethod
    def parse(cls, text: str, names: Sequence[str]) -> "GroupWord":
        return cls(tuple(names), parse_letters(text, names))


def format_word(names, letters) -> str:
    if not letters:
        return "1"
    parts = []
    i = 0
    while i < len(letters):
        g, e = letters[i]
        j = i
        while j < len(letters) and letters[j] == (g, e):
            j += 1
        n = (j - i) * e
        name = names[g]
        parts.append(name if n == 1 else f"{name}^{n}")
        i = j
    return "".join(parts)


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.names = sorted(((n, i) for i, n in enumerate(names)), key=lambda t: -len(t[0]))
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, 1, self.pos + 1)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def word(self, closing=""):
        out: list[Letter] = []
        while True:
            ch = self.peek()
            if ch == "" or ch == closing:
                return out
            if ch in ")],":
                self.error(f"unexpected {ch!r}")
            out.extend(self.factor())

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.word(")")
            if self.peek() != ")":
                self.error("missing ')'")
            self.pos += 1
            return inner
        if ch == "[":
            # commutator [u,v] = u^-1 v^-1 u v
            self.pos += 1
            u = self.word(",")
            if self.peek() != ",":
                self.error("missing ',' in commutator")
            self.pos += 1
            v = self.word("]")
            if self.peek() != "]":
                self.error("missing ']'")
            self.pos += 1
            return list(invert(u)) + list(invert(v)) + u + v
        if ch == "1" and not self._name_at():
            self.pos += 1
            return []
        hit = self._name_at()
        if hit is None:
            self.error(f"unknown generator at {self.text[self.pos:self.pos + 8]!r}")
        name, idx = hit
        self.pos += len(name)
        return [(idx, 1)]

    def _name_at(self):
        for name, idx in self.names:
            if self.text.startswith(name, self.pos):
                return name, idx
        return None

    def factor(self):
        base = self.atom()
        while True:
            ch = self.peek()
            if ch in _SUP:
                base = _power(base, self.superscript())
                continue
            if ch != "^":
                return base
            self.pos += 1
            nxt = self.peek()
            if nxt == "{":
                self.pos += 1
                n = self.integer()
                if self.peek() != "}":
                    self.error("missing '}'")
                self.pos += 1
                base = _power(base, n)
            elif nxt == "-" or nxt.isdigit():
                base = _power(base, self.integer())
            else:
                u = self.atom()
                base = list(u) + list(base) + list(invert(u))

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "-+":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        try:
            return int(self.text[start:self.pos])
        except ValueError:
            self.error("expected an integer exponent")

    def superscript(self) -> int:
        sign = 1
        if self.text[self.pos] == "⁻":
            sign = -1
            self.pos += 1
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _SUP and self.text[self.pos] != "⁻":
            self.pos += 1
        digits = "".join(_SUP[ch] for ch in self.text[start:self.pos])
        return sign * (int(digits) if digits else 1)


def _power(letters, n):
    base = list(letters) if n >= 0 else list(invert(letters))
    return base * abs(n)


def parse_letters(text: str, names: Sequence[str]) -> tuple[Letter, ...]:
    """Parse ``text`` into a freely reduced letter tuple over ``names``."""
    p = _Parser(text, names)
    raw = p.word()
    if p.peek():
        p.error("unexpected trailing input")
    return free_reduce(raw)
