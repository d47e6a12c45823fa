"""Finite invertible Mealy automata over the alphabet ``{0, ..., d-1}``.

A state ``q`` acts on words by ``q(x w) = rho_q(x) tau(q, x)(w)``.  Automata
are written in wreath-recursion notation, one state per line::

    a = s (c, a)
    b = (b, a)
    c = (a, a)

``s`` (or ``σ``) is the transposition of a binary alphabet; for larger
alphabets the root permutation is a product of disjoint cycles, e.g.
``(0 2 1)``, or ``(acb)`` when the alphabet letters carry names.
"""

from __future__ import annotations

import itertools
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from ._canon import pointed_code, refine
from .perms import cycles_of, from_cycles, table


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class NotInvertibleError(ValueError):
    pass


@dataclass(frozen=True)
class MealyAutomaton:
    """Transducer ``(Q, X, tau, rho)`` with ``Q`` named by ``states``."""

    states: tuple[str, ...]
    d: int
    transitions: tuple[tuple[int, ...], ...]
    outputs: tuple[tuple[int, ...], ...]
    letters: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("alphabet size must be at least 2")
        n = len(self.states)
        if n == 0:
            raise ValueError("automaton needs at least one state")
        if len(set(self.states)) != n:
            raise ValueError("duplicate state names")
        if len(self.transitions) != n or len(self.outputs) != n:
            raise ValueError("transition/output tables must have one row per state")
        for row_t, row_o in zip(self.transitions, self.outputs):
            if len(row_t) != self.d or len(row_o) != self.d:
                raise ValueError("table rows must have one entry per letter")
            if any(not 0 <= t < n for t in row_t):
                raise ValueError("transition to unknown state")
            if any(not 0 <= o < self.d for o in row_o):
                raise ValueError("output letter outside the alphabet")
        if self.letters is not None and len(self.letters) != self.d:
            raise ValueError("letter names must match the alphabet size")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise KeyError(f"no state named {name!r}") from None

    def letter_name(self, x: int) -> str:
        return self.letters[x] if self.letters else str(x)

    def is_invertible(self) -> bool:
        return validate_invertible(self)

    def perm_indices(self) -> list[int]:
        tab = table(self.d)
        return [tab.of(row) for row in self.outputs]

    def act(self, q: int, word: Sequence[int]) -> tuple[int, ...]:
        out = []
        for x in word:
            out.append(self.outputs[q][x])
            q = self.transitions[q][x]
        return tuple(out)

    def __str__(self) -> str:
        return format_recursion(self)


# ---------------------------------------------------------------- parsing

_NAME = r"[A-Za-z_][A-Za-z0-9_']*|\d+"
_TOKEN = re.compile(
    rf"\s*(?:(?P<name>{_NAME})|(?P<sigma>σ|\\sigma)|(?P<punct>[=(),]))"
)


def _tokenize(line: str, lineno: int):
    pos = 0
    toks = []
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        m = _TOKEN.match(line, pos)
        if not m:
            col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {line[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start + 1))
        pos = m.end()
    return toks


def _statements(text: str):
    lineno = 0
    for raw in text.splitlines() or [text]:
        lineno += 1
        line = raw.split("#", 1)[0]
        offset = 0
        for part in line.split(";"):
            if part.strip():
                yield lineno, offset, part
            offset += len(part) + 1


def parse_recursion(text: str, letters: Sequence[str] | None = None) -> MealyAutomaton:
    """Parse wreath-recursion text into an automaton.

    State order is declaration order.  ``letters`` optionally names the
    alphabet (used by cycle notation such as ``(acb)``).
    """
    decls = []
    for lineno, offset, stmt in _statements(text):
        toks = [(k, v, c + offset) for k, v, c in _tokenize(stmt, lineno)]
        if len(toks) < 2 or toks[0][0] != "name" or toks[1][1] != "=":
            col = toks[0][2] if toks else 1
            raise ParseError("expected 'name = ...'", lineno, col)
        groups = []  # parenthesised groups after '='
        sigma = None
        i = 2
        while i < len(toks):
            kind, val, col = toks[i]
            if kind == "sigma" or (kind == "name" and val == "s" and not groups
                                   and i + 1 < len(toks) and toks[i + 1][1] == "("):
                if sigma is not None or groups:
                    raise ParseError("misplaced transposition symbol", lineno, col)
                sigma = col
                i += 1
                continue
            if val != "(":
                raise ParseError(f"unexpected {val!r}", lineno, col)
            j = i + 1
            items = []
            while j < len(toks) and toks[j][1] != ")":
                items.append(toks[j])
                j += 1
            if j == len(toks):
                raise ParseError("unclosed parenthesis", lineno, col)
            groups.append((col, items))
            i = j + 1
        if not groups:
            raise ParseError("missing section tuple", lineno, toks[-1][2])
        sec_col, sec_items = groups[-1]
        names = [v for k, v, _ in sec_items if v != ","]
        expected_commas = len(names) - 1
        if sum(1 for _, v, _ in sec_items if v == ",") != expected_commas or len(names) < 2:
            raise ParseError("section tuple must be 'name, name, ...'", lineno, sec_col)
        cycles = []
        for col, items in groups[:-1]:
            if any(v == "," for _, v, _ in items):
                raise ParseError("only the last group may contain commas", lineno, col)
            cycles.append((col, [v for _, v, _ in items]))
        decls.append((lineno, toks[0][1], toks[0][2], sigma, cycles, names))

    if not decls:
        raise ParseError("no states declared")
    d = len(decls[0][5])
    if letters is not None and len(letters) != d:
        raise ParseError("letter names do not match the section tuple width")
    states = []
    for lineno, name, col, *_ in decls:
        if name in states:
            raise ParseError(f"duplicate state {name!r}", lineno, col)
        states.append(name)
    index = {s: i for i, s in enumerate(states)}
    transitions, outputs = [], []
    for lineno, name, col, sigma, cycles, names in decls:
        if len(names) != d:
            raise ParseError(f"expected {d} sections, got {len(names)}", lineno, col)
        row = []
        for nm in names:
            if nm not in index:
                raise ParseError(f"undeclared state {nm!r}", lineno, col)
            row.append(index[nm])
        transitions.append(tuple(row))
        if sigma is not None:
            if d != 2:
                raise ParseError("'s' denotes the transposition of a 2-letter alphabet", lineno, sigma)
            outputs.append((1, 0))
            continue
        parsed = []
        for ccol, toks_in in cycles:
            parsed.append(_cycle_letters(toks_in, d, letters, lineno, ccol))
        try:
            outputs.append(from_cycles(d, parsed))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, col) from None
    return MealyAutomaton(tuple(states), d, tuple(transitions), tuple(outputs),
                          tuple(letters) if letters else None)


def _cycle_letters(items, d, letters, lineno, col):
    lookup = {name: i for i, name in enumerate(letters)} if letters else {str(i): i for i in range(d)}
    out = []
    for tok in items:
        if tok in lookup:
            out.append(lookup[tok])
            continue
        # compact form such as (acb) or (012)
        for ch in tok:
            if ch not in lookup:
                raise ParseError(f"unknown letter {ch!r} in cycle", lineno, col)
            out.append(lookup[ch])
    return out


def format_recursion(A: MealyAutomaton, sep: str = "\n") -> str:
    lines = []
    for q, name in enumerate(A.states):
        perm = A.outputs[q]
        if A.d == 2 and perm == (1, 0):
            head = "s"
        else:
            head = "".join(
                "(" + ("".join if A.letters and all(len(l) == 1 for l in A.letters) else " ".join)(
                    A.letter_name(x) for x in cyc) + ")"
                for cyc in cycles_of(perm)
            )
        secs = ", ".join(A.states[t] for t in A.transitions[q])
        lines.append(f"{name} = {head}({secs})" if head else f"{name} = ({secs})")
    return sep.join(lines)


# ------------------------------------------------------------ operations

def validate_invertible(A: MealyAutomaton) -> bool:
    return all(sorted(row) == list(range(A.d)) for row in A.outputs)


def inverse_automaton(A: MealyAutomaton) -> MealyAutomaton:
    """Automaton whose state ``q^-1`` acts as the inverse of ``q``."""
    if not validate_invertible(A):
        raise NotInvertibleError("automaton is not invertible")
    transitions, outputs = [], []
    for q in range(A.n_states):
        rho = A.outputs[q]
        inv = [0] * A.d
        for x, y in enumerate(rho):
            inv[y] = x
        outputs.append(tuple(inv))
        transitions.append(tuple(A.transitions[q][inv[y]] for y in range(A.d)))
    names = tuple(_inverse_name(s) for s in A.states)
    return MealyAutomaton(names, A.d, tuple(transitions), tuple(outputs), A.letters)


def _inverse_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def _dual(A: MealyAutomaton) -> MealyAutomaton:
    if A.n_states < 2:
        raise ValueError("the dual of a 1-state automaton has a 1-letter alphabet")
    letters = A.letters or tuple(str(x) for x in range(A.d))
    transitions = tuple(
        tuple(A.outputs[q][x] for q in range(A.n_states)) for x in range(A.d)
    )
    outputs = tuple(
        tuple(A.transitions[q][x] for q in range(A.n_states)) for x in range(A.d)
    )
    dual_names = tuple(letters) if A.letters else tuple(f"x{x}" for x in range(A.d))
    return MealyAutomaton(dual_names, A.n_states, transitions, outputs, A.states)


def dual_automaton(A: MealyAutomaton) -> tuple[MealyAutomaton, bool, bool]:
    """Swap the roles of states and letters.

    Returns ``(dual, dual_invertible, bireversible)``.
    """
    dual = _dual(A)
    dual_inv = validate_invertible(dual)
    bireversible = False
    if validate_invertible(A) and dual_inv:
        bireversible = validate_invertible(_dual(inverse_automaton(A)))
    return dual, dual_inv, bireversible


def _tables(A: MealyAutomaton):
    return A.perm_indices(), [tuple(r) for r in A.transitions]


def state_classes(A: MealyAutomaton) -> list[int]:
    """Class id per state; equal ids iff the states act identically."""
    perm, sec = _tables(A)
    return refine(perm, sec)


def minimize(A: MealyAutomaton) -> MealyAutomaton:
    """Merge states that define the same automorphism.

    Each class keeps the name of its first member; class order follows the
    first occurrence in the input.
    """
    cls = state_classes(A)
    firsts: dict[int, int] = {}
    for q, c in enumerate(cls):
        firsts.setdefault(c, q)
    order = list(firsts)
    pos = {c: i for i, c in enumerate(order)}
    states = tuple(A.states[firsts[c]] for c in order)
    transitions = tuple(tuple(pos[cls[t]] for t in A.transitions[firsts[c]]) for c in order)
    outputs = tuple(A.outputs[firsts[c]] for c in order)
    return MealyAutomaton(states, A.d, transitions, outputs, A.letters)


def canonical_form(A: MealyAutomaton, pointed_at: str | int | None = None) -> bytes:
    """Byte key for equality up to state renaming.

    With ``pointed_at`` the key describes the automorphism defined by that
    state alone; two pointed automata get equal keys iff they define the same
    tree automorphism.  Without it the key is an isomorphism invariant of the
    minimized automaton.
    """
    perm, sec = _tables(A)
    cls = refine(perm, sec)
    if pointed_at is not None:
        q = pointed_at if isinstance(pointed_at, int) else A.state_index(pointed_at)
        code = pointed_code(perm, sec, q, cls)
        return _encode(A.d, code)
    m = minimize(A)
    return _encode(A.d, _unpointed_code(m))


def _unpointed_code(A: MealyAutomaton) -> tuple[int, ...]:
    # A must be minimal, so pointed codes of distinct states differ.
    perm, sec = _tables(A)
    n = A.n_states
    cls = list(range(n))
    pointed = [pointed_code(perm, sec, q, cls) for q in range(n)]
    rank = sorted(range(n), key=lambda q: pointed[q])
    best = None
    for start in range(n):
        order: dict[int, int] = {}
        seeds = [start] + rank
        for seed in seeds:
            if seed in order:
                continue
            queue = [seed]
            order[seed] = len(order)
            h = 0
            while h < len(queue):
                i = queue[h]
                h += 1
                for j in sec[i]:
                    if j not in order:
                        order[j] = len(order)
                        queue.append(j)
        inv = sorted(order, key=order.get)
        code = []
        for i in inv:
            code.append(perm[i])
            code.extend(order[j] for j in sec[i])
        code = tuple(code)
        if best is None or code < best:
            best = code
    return best


def _encode(d: int, code: Sequence[int]) -> bytes:
    return (f"{d}:" + ",".join(map(str, code))).encode()


# ------------------------------------------------------- (3,2) enumeration

STATE_NAMES = ("a", "b", "c")


def automaton_index(A: MealyAutomaton) -> int:
    """Mixed-radix index of a 3-state automaton over 2 letters.

    ``1 + sum_q sum_x tau(q,x) 3^(2q+x) + 729 sum_q [rho_q = s] 2^q``, with
    states counted in declaration order.  Index 1 is the trivial automaton.
    """
    if A.n_states != 3 or A.d != 2:
        raise ValueError("index is defined for 3-state automata over 2 letters")
    n = 0
    for q in range(3):
        for x in range(2):
            n += A.transitions[q][x] * 3 ** (2 * q + x)
    for q in range(3):
        if A.outputs[q] == (1, 0):
            n += 729 * 2 ** q
        elif A.outputs[q] != (0, 1):
            raise NotInvertibleError("automaton is not invertible")
    return n + 1


def from_index(n: int) -> MealyAutomaton:
    if not 1 <= n <= 5832:
        raise ValueError("index must lie in 1..5832")
    n -= 1
    bits, rest = divmod(n, 729)
    transitions = []
    for q in range(3):
        row = []
        for x in range(2):
            rest, t = divmod(rest, 3)
            row.append(t)
        transitions.append(tuple(row))
    outputs = tuple((1, 0) if bits >> q & 1 else (0, 1) for q in range(3))
    return MealyAutomaton(STATE_NAMES, 2, tuple(transitions), outputs)


def enumerate_all(states: int = 3, d: int = 2) -> Iterator[MealyAutomaton]:
    """All invertible 3-state automata over 2 letters, in index order."""
    if (states, d) != (3, 2):
        raise ValueError("only (3, 2)-automata are enumerated")
    for n in range(1, 5833):
        yield from_index(n)


# ---------------------------------------------------------- symmetries

def relabel_states(A: MealyAutomaton, perm: Sequence[int]) -> MealyAutomaton:
    """Move state ``q`` to position ``perm[q]`` (names travel with states)."""
    n = A.n_states
    inv = [0] * n
    for q, p in enumerate(perm):
        inv[p] = q
    states = tuple(A.states[inv[p]] for p in range(n))
    transitions = tuple(tuple(perm[t] for t in A.transitions[inv[p]]) for p in range(n))
    outputs = tuple(A.outputs[inv[p]] for p in range(n))
    return MealyAutomaton(states, A.d, transitions, outputs, A.letters)


def relabel_letters(A: MealyAutomaton, pi: Sequence[int]) -> MealyAutomaton:
    """Conjugate every state by the letter permutation ``pi``."""
    inv = [0] * A.d
    for x, y in enumerate(pi):
        inv[y] = x
    transitions = tuple(tuple(row[inv[y]] for y in range(A.d)) for row in A.transitions)
    outputs = tuple(tuple(pi[row[inv[y]]] for y in range(A.d)) for row in A.outputs)
    return MealyAutomaton(A.states, A.d, transitions, outputs, A.letters)


def invert_states(A: MealyAutomaton) -> MealyAutomaton:
    """The inverse automaton, keeping the original state names."""
    inv = inverse_automaton(A)
    return MealyAutomaton(A.states, A.d, inv.transitions, inv.outputs, A.letters)


def _raw_code(A: MealyAutomaton) -> tuple[int, ...]:
    out = []
    for q in range(A.n_states):
        out.extend(A.outputs[q])
        out.extend(A.transitions[q])
    return tuple(out)


def symmetry_images(A: MealyAutomaton) -> Iterator[MealyAutomaton]:
    """Images of ``A`` under state permutations, letter permutations and inversion."""
    for inverted in (False, True):
        B = invert_states(A) if inverted else A
        for pi in itertools.permutations(range(A.d)):
            C = relabel_letters(B, pi)
            for sp in itertools.permutations(range(A.n_states)):
                yield relabel_states(C, sp)


def symmetry_key(A: MealyAutomaton) -> bytes:
    """Class key under the symmetry group, followed by the minimized size."""
    best = min(_raw_code(B) for B in symmetry_images(A))
    minimal = minimize(A).n_states
    return _encode(A.d, best) + f"|m{minimal}".encode()


def minimized_symmetry_key(A: MealyAutomaton) -> bytes:
    """Key of the minimized automaton up to the same symmetries."""
    m = minimize(A)
    return min(_encode(m.d, _raw_code(B)) for B in symmetry_images(m))


@dataclass
class SymmetryClass:
    key: bytes
    representative: MealyAutomaton
    members: list[int]
    minimized_states: int


@dataclass
class SymmetryReduction:
    total: int
    classes: list[SymmetryClass]

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def minimal_class_count(self) -> int:
        """Classes whose minimization keeps all states."""
        return sum(1 for c in self.classes if c.minimized_states == c.representative.n_states)

    @property
    def minimized_class_count(self) -> int:
        """Distinct minimized automata up to symmetry (any state count)."""
        return len({minimized_symmetry_key(c.representative) for c in self.classes})


def symmetry_reduce(automata: Iterable[MealyAutomaton]) -> SymmetryReduction:
    """Partition automata by :func:`symmetry_key`.

    Class order and representatives follow the first member in input order.
    """
    buckets: dict[bytes, SymmetryClass] = {}
    total = 0
    for A in automata:
        total += 1
        key = symmetry_key(A)
        cls = buckets.get(key)
        idx = automaton_index(A) if (A.n_states, A.d) == (3, 2) else total
        if cls is None:
            buckets[key] = SymmetryClass(key, A, [idx], minimize(A).n_states)
        else:
            cls.members.append(idx)
    return SymmetryReduction(total, list(buckets.values()))


# ------------------------------------------------------------------- DOT

def moore_dot(A: MealyAutomaton, name: str = "moore") -> str:
    """Moore diagram: nodes labelled by root permutations, edges by letters."""
    def perm_label(row):
        if A.d == 2 and tuple(row) == (1, 0):
            return "σ"
        cyc = cycles_of(row)
        if not cyc:
            return "1"
        return "".join("(" + " ".join(A.letter_name(x) for x in c) + ")" for c in cyc)

    lines = [f"digraph {name} {{"]
    for q, s in enumerate(A.states):
        lines.append(f'  "{s}" [label="{s}\\n{perm_label(A.outputs[q])}"];')
    grouped = defaultdict(list)
    for q in range(A.n_states):
        for x in range(A.d):
            grouped[q].append((A.transitions[q][x], x))
    for q in range(A.n_states):
        for t, x in grouped[q]:
            lines.append(f'  "{A.states[q]}" -> "{A.states[t]}" [label="{A.letter_name(x)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
