"""Automorphisms defined by self-referential wreath recursions.

A system such as ``mu = s(mu, c^-1 mu)`` over an automaton names unknowns
whose sections are words in the automaton states and the unknowns.  The
unknowns need not be finite-state, so they are handled through their
level-``n`` permutations only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .automaton import MealyAutomaton, ParseError
from .element import Element, automaton_elements
from .perms import from_cycles
from .words import parse_letters

_LINE = re.compile(r"^\s*(?P<name>[^\s=]+)\s*=\s*(?P<perm>s|σ|(?:\([^,()]*\))*)\s*\((?P<secs>.*)\)\s*$")


@dataclass(frozen=True)
class RecursiveAutomorphism:
    """Unknowns ``x_i = perm_i (w_i0, ..., w_i(d-1))`` over a base automaton."""

    base: MealyAutomaton
    unknowns: tuple[str, ...]
    perms: tuple[tuple[int, ...], ...]
    sections: tuple[tuple[tuple[tuple[int, int], ...], ...], ...]  # letters over base states + unknowns

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.base.states) + self.unknowns

    @classmethod
    def parse(cls, text: str, base: MealyAutomaton) -> "RecursiveAutomorphism":
        lines = [ln.split("#", 1)[0] for ln in re.split(r"[\n;]", text)]
        lines = [ln for ln in lines if ln.strip()]
        unknowns = []
        parsed = []
        for no, ln in enumerate(lines, 1):
            m = _LINE.match(ln)
            if not m:
                raise ParseError("expected 'name = perm(word, ..., word)'", no, 1)
            unknowns.append(m.group("name"))
            parsed.append((no, m))
        if len(set(unknowns)) != len(unknowns):
            raise ParseError("unknown defined twice")
        clash = set(unknowns) & set(base.states)
        if clash:
            raise ParseError(f"unknown shadows a state: {sorted(clash)}")
        names = tuple(base.states) + tuple(unknowns)
        d = base.d
        perms, sections = [], []
        for no, m in parsed:
            ptxt = m.group("perm")
            if ptxt in ("s", "σ"):
                if d != 2:
                    raise ParseError("'s' needs a 2-letter alphabet", no, 1)
                perms.append((1, 0))
            else:
                cycles = [[int(c) for c in grp.split()] for grp in re.findall(r"\(([^()]*)\)", ptxt)]
                perms.append(from_cycles(d, cycles))
            words = [w.strip() for w in m.group("secs").split(",")]
            if len(words) != d:
                raise ParseError(f"expected {d} sections", no, 1)
            sections.append(tuple(parse_letters(w, names) for w in words))
        return cls(base, tuple(unknowns), tuple(perms), tuple(sections))


def _compose(p, q):
    return [p[i] for i in q]


def _invert(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return out


def expand_recursive(defn: RecursiveAutomorphism, depth: int) -> dict[str, list[int]]:
    """Level-``depth`` permutation of every unknown (vertex index = base-d
    value with the first letter most significant)."""
    d = defn.base.d
    gens = automaton_elements(defn.base)
    nb = len(gens)
    cur = {u: [0] for u in range(len(defn.unknowns))}
    for n in range(1, depth + 1):
        size = d ** (n - 1)
        base_prev = [g.level_permutation(n - 1) for g in gens]
        base_inv = [_invert(p) for p in base_prev]
        unk_inv = {u: _invert(p) for u, p in cur.items()}

        def word_perm(letters):
            out = list(range(size))
            for g, e in reversed(letters):
                if g < nb:
                    p = base_prev[g] if e > 0 else base_inv[g]
                else:
                    p = cur[g - nb] if e > 0 else unk_inv[g - nb]
                out = _compose(p, out)
            return out

        nxt = {}
        for u in range(len(defn.unknowns)):
            pi = defn.perms[u]
            row = [0] * (size * d)
            for x in range(d):
                sub = word_perm(defn.sections[u][x])
                for t in range(size):
                    row[x * size + t] = pi[x] * size + sub[t]
            nxt[u] = row
        cur = nxt
    return {defn.unknowns[u]: p for u, p in cur.items()}


def portrait_of(perm_level: list[int], d: int, depth: int) -> list[tuple[int, ...]]:
    """Root permutations at every vertex of levels ``0..depth-1`` recovered
    from a level-``depth`` permutation."""
    out = []
    for k in range(depth):
        block = d ** (depth - k)
        sub = d ** (depth - k - 1)
        for v in range(d ** k):
            base = v * block
            out.append(tuple((perm_level[base + x * sub] % block) // sub for x in range(d)))
    return out


Target = Element | tuple[RecursiveAutomorphism, str]


def _target_perm(t: Target, depth: int) -> list[int]:
    if isinstance(t, Element):
        return t.level_permutation(depth)
    defn, name = t
    return expand_recursive(defn, depth)[name]


def conjugacy_check(defn: RecursiveAutomorphism, conjugator: str,
                    targets: Mapping[str, Target], depth: int = 10) -> bool:
    """Bounded check that ``mu^-1 s mu`` equals the target of each generator
    ``s`` on level ``depth`` (hence on every shallower level).

    This is evidence only: agreement on finitely many levels.
    """
    mu = expand_recursive(defn, depth)[conjugator]
    mu_inv = _invert(mu)
    for s, target in targets.items():
        g = Element.from_state(defn.base, s).level_permutation(depth)
        conj = _compose(mu_inv, _compose(g, mu))
        if conj != _target_perm(target, depth):
            return False
    return True


def conjugated_generators(defn: RecursiveAutomorphism, conjugator: str,
                          gens: Sequence[str], depth: int) -> dict[str, list[int]]:
    mu = expand_recursive(defn, depth)[conjugator]
    mu_inv = _invert(mu)
    return {s: _compose(mu_inv, _compose(Element.from_state(defn.base, s).level_permutation(depth), mu))
            for s in gens}
