"""Tree automorphisms given by finite-state wreath recursions.

An :class:`Element` is the canonical code of the minimized automaton pointed
at the element itself (see :mod:`mealygroups._canon`).  Equal codes mean equal
automorphisms, so the word problem reduces to comparing codes.

Products follow ``(fg)(w) = f(g(w))``: the section of ``fg`` at ``x`` is
``f|_{g(x)} g|_x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import itertools
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from ._canon import pointed_code
from .automaton import MealyAutomaton
from .perms import table
from .words import GroupWord

DEFAULT_SECTION_CAP = 10_000


class SectionCapExceeded(RuntimeError):
    pass


def identity_code(d: int) -> tuple[int, ...]:
    return (0,) * (d + 1)


def _split(code, d):
    w = d + 1
    n = len(code) // w
    perm = [code[i * w] for i in range(n)]
    sec = [tuple(code[i * w + 1:i * w + 1 + d]) for i in range(n)]
    return perm, sec


def mul_codes(f, g, d: int, cap: int = DEFAULT_SECTION_CAP) -> tuple[int, ...]:
    tab = table(d)
    comp = tab.compose
    perms = tab.perms
    w = d + 1
    idx = {(0, 0): 0}
    states = [(0, 0)]
    perm: list[int] = []
    sec: list[tuple[int, ...]] = []
    h = 0
    while h < len(states):
        i, j = states[h]
        h += 1
        pi = f[i * w]
        pj = g[j * w]
        perm.append(comp[pi][pj])
        img = perms[pj]
        row = []
        for x in range(d):
            key = (f[i * w + 1 + img[x]], g[j * w + 1 + x])
            t = idx.get(key)
            if t is None:
                t = idx[key] = len(states)
                states.append(key)
                if len(states) > cap:
                    raise SectionCapExceeded(f"product has more than {cap} sections")
            row.append(t)
        sec.append(tuple(row))
    return pointed_code(perm, sec, 0)


def inverse_code(f, d: int) -> tuple[int, ...]:
    tab = table(d)
    perm, sec = _split(f, d)
    iperm = [tab.inverse[p] for p in perm]
    isec = []
    for p, s in zip(perm, sec):
        img = tab.perms[p]
        inv = [0] * d
        for x, y in enumerate(img):
            inv[y] = x
        isec.append(tuple(s[inv[y]] for y in range(d)))
    return pointed_code(iperm, isec, 0, range(len(iperm)))


def section_code(f, d: int, x: int) -> tuple[int, ...]:
    perm, sec = _split(f, d)
    return pointed_code(perm, sec, sec[0][x], range(len(perm)))


@dataclass(frozen=True)
class Element:
    """A finite-state automorphism of the ``d``-ary tree."""

    d: int
    code: tuple[int, ...]
    cap: int = field(default=DEFAULT_SECTION_CAP, compare=False, repr=False)

    @classmethod
    def identity(cls, d: int = 2) -> "Element":
        return cls(d, identity_code(d))

    @classmethod
    def from_state(cls, A: MealyAutomaton, q: int | str) -> "Element":
        qi = q if isinstance(q, int) else A.state_index(q)
        return cls(A.d, pointed_code(A.perm_indices(), A.transitions, qi))

    @classmethod
    def from_recursion(cls, perm: Sequence[int], sections: Sequence["Element"]) -> "Element":
        """Element ``perm (s_0, ..., s_{d-1})`` from a root permutation and sections."""
        d = len(perm)
        if len(sections) != d or any(s.d != d for s in sections):
            raise ValueError("need one section per letter over the same alphabet")
        tab = table(d)
        all_perm = [tab.of(perm)]
        all_sec: list[tuple[int, ...]] = [()]
        offsets = []
        for s in sections:
            offsets.append(len(all_perm))
            p, sc = _split(s.code, d)
            base = offsets[-1]
            all_perm.extend(p)
            all_sec.extend(tuple(t + base for t in row) for row in sc)
        all_sec[0] = tuple(offsets)
        return cls(d, pointed_code(all_perm, all_sec, 0))

    # -- structure ------------------------------------------------------
    @property
    def n_states(self) -> int:
        return len(self.code) // (self.d + 1)

    @property
    def root_perm(self) -> tuple[int, ...]:
        return table(self.d).perms[self.code[0]]

    @property
    def is_root_active(self) -> bool:
        return self.code[0] != 0

    def is_trivial(self) -> bool:
        return self.code == identity_code(self.d)

    def sections(self) -> tuple["Element", ...]:
        return tuple(self.section((x,)) for x in range(self.d))

    def section(self, v: Sequence[int]) -> "Element":
        w = self.d + 1
        i = 0
        for x in v:
            if not 0 <= x < self.d:
                raise ValueError(f"letter {x} outside the alphabet")
            i = self.code[i * w + 1 + x]
        if i == 0:
            return self
        perm, sec = _split(self.code, self.d)
        # canonical codes are minimized: every state is its own class
        return Element(self.d, pointed_code(perm, sec, i, range(len(perm))), self.cap)

    def state_elements(self) -> list["Element"]:
        """All distinct sections (the states of the canonical automaton)."""
        perm, sec = _split(self.code, self.d)
        cls = range(len(perm))
        return [Element(self.d, pointed_code(perm, sec, i, cls), self.cap) for i in range(self.n_states)]

    # -- arithmetic -----------------------------------------------------
    def __mul__(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            return NotImplemented
        if other.d != self.d:
            raise ValueError("alphabet mismatch")
        return Element(self.d, mul_codes(self.code, other.code, self.d, self.cap), self.cap)

    def inverse(self) -> "Element":
        return Element(self.d, inverse_code(self.code, self.d), self.cap)

    def __invert__(self):
        return self.inverse()

    def __pow__(self, n: int) -> "Element":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = Element(self.d, identity_code(self.d), self.cap)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def with_cap(self, cap: int) -> "Element":
        return replace(self, cap=cap)

    def conj(self, u: "Element") -> "Element":
        """``u self u^-1``."""
        return u * self * u.inverse()

    # -- action ---------------------------------------------------------
    def act(self, word: Sequence[int]) -> tuple[int, ...]:
        w = self.d + 1
        perms = table(self.d).perms
        out = []
        i = 0
        for x in word:
            if not 0 <= x < self.d:
                raise ValueError(f"letter {x} outside the alphabet")
            out.append(perms[self.code[i * w]][x])
            i = self.code[i * w + 1 + x]
        return tuple(out)

    def act_with_state(self, word: Sequence[int]):
        w = self.d + 1
        perms = table(self.d).perms
        out = []
        i = 0
        for x in word:
            out.append(perms[self.code[i * w]][x])
            i = self.code[i * w + 1 + x]
        return tuple(out), i

    def level_permutation(self, n: int) -> list[int]:
        """Permutation of level ``n`` vertices indexed by binary-style value.

        The first letter is the most significant digit.
        """
        d = self.d
        w = d + 1
        perms = table(d).perms
        # images[i] = list over words of length k of image index, for state i
        k_imgs = [[0] for _ in range(self.n_states)]
        for _ in range(n):
            nxt = []
            for i in range(self.n_states):
                p = perms[self.code[i * w]]
                size = len(k_imgs[0])
                row = [0] * (size * d)
                for x in range(d):
                    sub = k_imgs[self.code[i * w + 1 + x]]
                    hi = p[x] * size
                    lo = x * size
                    for t in range(size):
                        row[lo + t] = hi + sub[t]
                nxt.append(row)
            k_imgs = nxt
        return k_imgs[0]

    def __repr__(self):
        return f"Element(d={self.d}, states={self.n_states}, code={self.code})"

    def summary(self, names: dict | None = None) -> dict:
        return {
            "root_permutation": list(self.root_perm),
            "states": self.n_states,
            "trivial": self.is_trivial(),
            "code": list(self.code),
        }


def product(elements: Iterable[Element], d: int = 2) -> Element:
    return reduce(lambda a, b: a * b, elements, Element.identity(d))


# ----------------------------------------------------------------- rays

@dataclass(frozen=True)
class Ray:
    """Eventually periodic boundary point ``head period period ...``."""

    head: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        head, period = normalize_ray(tuple(self.head), tuple(self.period))
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)

    def prefix(self, n: int) -> tuple[int, ...]:
        out = list(self.head[:n])
        while len(out) < n:
            out.extend(self.period)
        return tuple(out[:n])

    @classmethod
    def parse(cls, text: str) -> "Ray":
        """``head:period`` with letters as digits, e.g. ``11:0``."""
        if ":" not in text:
            raise ValueError("ray syntax is head:period")
        h, p = text.split(":", 1)
        return cls(tuple(int(c) for c in h.strip()), tuple(int(c) for c in p.strip()))

    def __str__(self):
        return "".join(map(str, self.head)) + ":" + "".join(map(str, self.period))


def normalize_ray(head, period):
    n = len(period)
    for k in range(1, n + 1):
        if n % k == 0 and period == period[:k] * (n // k):
            period = period[:k]
            break
    while head and head[-1] == period[-1]:
        head = head[:-1]
        period = period[-1:] + period[:-1]
    return head, period


def act_ray(g: Element, r: Ray) -> Ray:
    out_head, state = g.act_with_state(r.head)
    w = g.d + 1
    perms = table(g.d).perms
    seen: dict[int, int] = {}
    blocks: list[tuple[int, ...]] = []
    while state not in seen:
        seen[state] = len(blocks)
        block = []
        for x in r.period:
            block.append(perms[g.code[state * w]][x])
            state = g.code[state * w + 1 + x]
        blocks.append(tuple(block))
    start = seen[state]
    head = out_head + tuple(x for b in blocks[:start] for x in b)
    period = tuple(x for b in blocks[start:] for x in b)
    return Ray(head, period)


# ----------------------------------------------------------- evaluation

def evaluate(word: GroupWord, generators: Sequence[Element]) -> Element:
    """Element of a word given the elements of its generators."""
    if not generators:
        raise ValueError("no generators")
    d = generators[0].d
    inverses: dict[int, Element] = {}
    result = Element.identity(d)
    for g, e in word.letters:
        if e > 0:
            result = result * generators[g]
        else:
            if g not in inverses:
                inverses[g] = generators[g].inverse()
            result = result * inverses[g]
    return result


def automaton_elements(A: MealyAutomaton) -> list[Element]:
    return [Element.from_state(A, q) for q in range(A.n_states)]


def word_element(A: MealyAutomaton, text: str) -> Element:
    return evaluate(GroupWord.parse(text, A.states), automaton_elements(A))


def is_trivial(g) -> bool:
    return g.is_trivial()


def equals(f: Element, g: Element) -> bool:
    return f == g


# --------------------------------------------------------------- order

@dataclass(frozen=True)
class Finite:
    order: int


@dataclass(frozen=True)
class SphericallyTransitive:
    element: Element


@dataclass(frozen=True)
class PowerSelfSection:
    """``g^stem_power`` fixes ``stem`` with section ``h``; ``h^cycle_power``
    fixes ``vertex`` with section ``h`` while ``vertex`` has an ``h``-orbit of
    exactly ``cycle_power >= 2`` points.  Then ``|h| >= cycle_power |h|``."""

    stem: tuple[int, ...]
    stem_power: int
    h: Element
    vertex: tuple[int, ...]
    cycle_power: int


@dataclass(frozen=True)
class RayOrbit:
    """``g^power`` maps rays ending in ``tail`` repeated to rays of the same
    kind and never shortens their heads, but lengthens the head of
    ``head tail tail ...``.  A finite orbit would have constant head length,
    so that orbit is infinite."""

    power: int
    tail: int
    head: tuple[int, ...]


@dataclass(frozen=True)
class AffineUnipotent:
    """Binary tree: ``g`` is affine over GF(2), ``w -> (1 + N) w + c`` with
    ``N`` strictly lower triangular.  Reading zeros from ``g`` the states
    cycle after ``preperiod`` steps, and on that cycle ``N e_i`` has its
    lowest bit at ``i + 1 + offset``.  Lowest bits then strictly increase, so
    ``N`` is not nilpotent and no power ``(1 + N)^(2^k) = 1 + N^(2^k)`` is 1."""

    preperiod: int
    offset: int


@dataclass(frozen=True)
class SectionOf:
    """``g^power`` fixes ``vertex`` with section ``h``, and ``inner`` shows
    ``h`` has infinite order; a finite ``|g|`` would bound ``|h|``."""

    vertex: tuple[int, ...]
    power: int
    h: Element
    inner: "Certificate"


Certificate = (SphericallyTransitive | PowerSelfSection | RayOrbit | AffineUnipotent
               | SectionOf)


@dataclass(frozen=True)
class Infinite:
    certificate: Certificate


@dataclass(frozen=True)
class Unknown:
    reason: str


OrderVerdict = Finite | Infinite | Unknown


def _orbits(perm) -> list[tuple[int, int]]:
    """(smallest point, length) per cycle, fixed points included."""
    seen = set()
    out = []
    for x in range(len(perm)):
        if x in seen:
            continue
        k = 0
        y = x
        while y not in seen:
            seen.add(y)
            y = perm[y]
            k += 1
        out.append((x, k))
    return out


def _explore(g: Element, max_nodes: int):
    """Orbit-section graph: edges ``h -> (h^k)|_x`` for each root orbit of
    ``h`` (representative ``x``, length ``k``).  Returns the nodes, the edge
    lists of expanded nodes, BFS parents, and why exploration stopped early
    (None when the graph closed)."""
    nodes = {g: 0}
    order = [g]
    parent: dict[int, tuple[int, int, int] | None] = {0: None}
    edges: list[list[tuple[int, int, int]]] = []
    i = 0
    while i < len(order):
        e = order[i]
        out = []
        try:
            for x, k in _orbits(e.root_perm):
                t = (e ** k).section((x,))
                j = nodes.get(t)
                if j is None:
                    if len(order) >= max_nodes:
                        return order, edges, parent, f"orbit graph exceeds {max_nodes} nodes"
                    j = nodes[t] = len(order)
                    order.append(t)
                    parent[j] = (i, x, k)
                out.append((j, x, k))
        except SectionCapExceeded as exc:
            return order, edges, parent, str(exc)
        edges.append(out)
        i += 1
    return order, edges, parent, None


def _lcm(a, b):
    return a * b // gcd(a, b)


def verify_power_self_section(g: Element, cert: PowerSelfSection) -> bool:
    p = g ** cert.stem_power
    if p.act(cert.stem) != tuple(cert.stem) or p.section(cert.stem) != cert.h:
        return False
    h = cert.h
    if cert.cycle_power < 2:
        return False
    v = tuple(cert.vertex)
    q = Element.identity(g.d)
    for j in range(1, cert.cycle_power):
        q = q * h
        if q.act(v) == v:
            return False
    hk = q * h
    return hk.act(v) == v and hk.section(v) == h


def verify_certificate(g: Element, cert: Certificate) -> bool:
    """Re-check an infinite-order certificate for ``g`` from scratch."""
    try:
        if isinstance(cert, SphericallyTransitive):
            return cert.element == g and g.d == 2 and is_spherically_transitive(g)
        if isinstance(cert, PowerSelfSection):
            return verify_power_self_section(g, cert)
        if isinstance(cert, RayOrbit):
            return cert.power >= 1 and _ray_orbit_holds(g ** cert.power, cert.tail, cert.head)
        if isinstance(cert, AffineUnipotent):
            return _affine_unipotent(g) == (cert.preperiod, cert.offset)
        if isinstance(cert, SectionOf):
            p = g ** cert.power
            v = tuple(cert.vertex)
            return (cert.power >= 1 and p.act(v) == v and p.section(v) == cert.h
                    and verify_certificate(cert.h, cert.inner))
    except SectionCapExceeded:
        return False
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def order(g: Element, max_nodes: int = 4096, max_exponent: int = 2 ** 10,
          cap: int = 2000, probe_nodes: int = 256, probe_cap: int = 256) -> OrderVerdict:
    """Decide the order of ``g``.

    Infinite verdicts carry a certificate (see :func:`verify_certificate`);
    finite ones are checked by powers.  When the orbit-section graph does not
    close, its first ``probe_nodes`` nodes with at most ``probe_cap // 2``
    states are probed for direct certificates, with products capped at
    ``probe_cap`` states.  Exploration products are capped at ``cap``.
    """
    if g.is_trivial():
        return Finite(1)
    if g.d == 2 and is_spherically_transitive(g):
        return Infinite(SphericallyTransitive(g))
    nodes, edges, parent, stopped = _explore(g.with_cap(cap), max_nodes)
    if stopped is None:
        cert = _weighted_cycle(nodes, edges, parent)
        if cert is not None:
            return Infinite(cert)
        return _finite_order(g, nodes, edges, max_exponent)
    for i, h in enumerate(nodes[:probe_nodes]):
        if 2 * h.n_states > probe_cap:
            continue
        inner = _probe(h.with_cap(probe_cap))
        if inner is None:
            continue
        if i == 0:
            return Infinite(inner)
        stem, power = _path_to(i, parent)
        return Infinite(SectionOf(stem, power, h.with_cap(g.cap), inner))
    return Unknown(stopped)


def _finite_order(g, nodes, edges, max_exponent) -> OrderVerdict:
    # every cycle has weight 1: least fixpoint of ord(h) = lcm k*ord(next)
    n = len(nodes)
    orders = [1] * n
    changed = True
    while changed:
        changed = False
        for i in range(n):
            val = 1
            for j, _, k in edges[i]:
                val = _lcm(val, k * orders[j])
            if val != orders[i]:
                orders[i] = val
                changed = True
    m = orders[0]
    if m > max_exponent:
        return Unknown(f"order {m} exceeds the exponent budget")
    try:
        if not (g ** m).is_trivial():
            return Unknown("order recursion not confirmed by powers")
        for p in _prime_factors(m):
            if (g ** (m // p)).is_trivial():
                return Unknown("order recursion not minimal")
    except SectionCapExceeded as exc:
        return Unknown(str(exc))
    return Finite(m)


def _probe(h: Element):
    try:
        if h.d == 2:
            if is_spherically_transitive(h):
                return SphericallyTransitive(h)
            aff = _affine_unipotent(h)
            if aff is not None:
                return AffineUnipotent(*aff)
        p, m = h, 1
        while m <= 4:
            for t in range(h.d):
                head = _ray_orbit_head(p, t)
                if head is not None:
                    return RayOrbit(m, t, head)
            p, m = p * p, 2 * m
    except SectionCapExceeded:
        pass
    return None


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _weighted_cycle(nodes, edges, parent):
    """Certificate from a reachable cycle whose orbit weights multiply past 1."""
    for start in range(len(nodes)):
        found = _cycle_from(start, edges)
        if found is None:
            continue
        stem, sp = _path_to(start, parent)
        vertex, power = found
        return PowerSelfSection(stem, sp, nodes[start], vertex, power)
    return None


def _path_to(i, parent):
    letters = []
    power = 1
    while parent[i] is not None:
        p, x, k = parent[i]
        letters.append(x)
        power *= k
        i = p
    return tuple(reversed(letters)), power


def _cycle_from(start, edges):
    # DFS over (node, weighted flag); returns (vertex, product) for a return
    # to start with product > 1
    stack = [(start, (), 1, iter(edges[start]))]
    visited = {(start, False)}
    while stack:
        node, path, w, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            continue
        j, x, k = nxt
        nw = w * k
        npath = path + (x,)
        if j == start and nw > 1:
            return npath, nw
        key = (j, nw > 1)
        if key in visited:
            continue
        visited.add(key)
        stack.append((j, npath, nw, iter(edges[j])))
    return None


# ---------------------------------------------------------- ray orbits

def _state_table(g: Element):
    w = g.d + 1
    perms = table(g.d).perms
    c = g.code
    return ([perms[c[i * w]] for i in range(g.n_states)],
            [c[i * w + 1:i * w + w] for i in range(g.n_states)])


def _tail_fixed(perm, sec, t):
    """Per state: None if reading ``t`` forever does not end in ``t``
    outputs, else whether the whole output is ``t`` forever."""
    out = []
    for q in range(len(perm)):
        pos: dict[int, int] = {}
        path = []
        c = q
        while c not in pos:
            pos[c] = len(path)
            path.append(c)
            c = sec[c][t]
        if any(perm[s][t] != t for s in path[pos[c]:]):
            return None
        out.append(all(perm[s][t] == t for s in path))
    return out


def _heads_never_shrink(g: Element, t: int) -> bool:
    perm, sec = _state_table(g)
    z = _tail_fixed(perm, sec, t)
    if z is None:
        return False
    # a head u ending in s != t keeps length >= |u| unless s is sent to t and
    # the section after it returns the pure tail
    for p in range(len(perm)):
        for s in range(g.d):
            if s != t and perm[p][s] == t and z[sec[p][s]]:
                return False
    return True


def _ray_orbit_holds(g: Element, t: int, head) -> bool:
    head = tuple(head)
    if head and head[-1] == t:
        return False
    if not _heads_never_shrink(g, t):
        return False
    im = act_ray(g, Ray(head, (t,)))
    return im.period == (t,) and len(im.head) > len(head)


def _ray_orbit_head(g: Element, t: int, max_head: int = 6):
    if not _heads_never_shrink(g, t):
        return None
    for n in range(max_head + 1):
        for head in itertools.product(range(g.d), repeat=n):
            if head and head[-1] == t:
                continue
            im = act_ray(g, Ray(head, (t,)))
            if len(im.head) > n:
                return head
    return None


# ------------------------------------------------------- affine elements

def _is_translation(t: Element) -> bool:
    """Adds a fixed sequence: the output never depends on earlier input."""
    w = t.d + 1
    c = t.code
    return all(c[i * w + 1] == c[i * w + 2] for i in range(t.n_states))


def _affine_unipotent(g: Element):
    """(preperiod, offset) for :class:`AffineUnipotent`, or None."""
    if g.d != 2:
        return None
    # cheap necessary condition first: the level-6 action is affine
    lp = g.level_permutation(6)
    c0 = lp[0]
    if any(lp[u ^ v] != lp[u] ^ lp[v] ^ c0 for u in range(64) for v in range(u)):
        return None
    for p in g.state_elements():
        s0, s1 = p.sections()
        if not _is_translation(s1 * s0.inverse()):
            return None
    pos: dict[Element, int] = {}
    path = []
    p = g
    while p not in pos:
        pos[p] = len(path)
        path.append(p)
        p = p.section((0,))
    offsets = set()
    for q in path[pos[p]:]:
        s0, s1 = q.sections()
        r = act_ray(s1 * s0.inverse(), Ray((), (0,)))
        bits = r.head + r.period
        if 1 not in bits:
            return None
        offsets.add(bits.index(1))
    if len(offsets) != 1:
        return None
    return pos[p], offsets.pop()


# ------------------------------------------------- transitivity, depth

def transitive_by_squaring(g: Element, max_steps: int = 256):
    """Second route to spherical transitivity: iterate ``t <- (t^2)|_0`` and
    look for a repeat.  Returns True/False, or None when products outgrow the
    section cap or the steps run out."""
    if g.d != 2:
        raise ValueError("spherical transitivity is decided for d = 2 only")
    seen = set()
    t = g
    try:
        for _ in range(max_steps):
            if not t.is_root_active:
                return False
            if t in seen:
                return True
            seen.add(t)
            t = (t * t).section((0,))
    except SectionCapExceeded:
        return None
    return None


def is_spherically_transitive(g: Element) -> bool:
    """Binary tree only.  If ``g`` is transitive on level n then it is
    transitive on level n+1 iff an odd number of its level-n sections are
    root active.  Those section counts, taken mod 2 per state, evolve by a
    linear map, so the question is whether every vector in one finite orbit
    has odd parity."""
    if g.d != 2:
        raise ValueError("spherical transitivity is decided for d = 2 only")
    perm, sec = _state_table(g)
    n = len(perm)
    odd = 0
    for q in range(n):
        if perm[q][0] == 1:
            odd |= 1 << q
    image = [(1 << sec[q][0]) ^ (1 << sec[q][1]) for q in range(n)]
    seen = set()
    v = 1  # the root vertex carries g, which is state 0
    while v not in seen:
        if (v & odd).bit_count() % 2 == 0:
            return False
        seen.add(v)
        w = 0
        q = 0
        while v >> q:
            if v >> q & 1:
                w ^= image[q]
            q += 1
        v = w
    return True


def finitary_depth(g: Element) -> int | None:
    """Lowest level at which every section is trivial, or None."""
    d = g.d
    w = d + 1
    n = g.n_states
    ident = None
    ic = identity_code(d)
    for i in range(n):
        # in a canonical code the identity class is the state with a
        # trivial permutation whose sections all loop to itself
        if g.code[i * w] == 0 and all(g.code[i * w + 1 + x] == i for x in range(d)):
            ident = i
    depth: dict[int, int] = {}
    on_stack: set[int] = set()

    def visit(i):
        if i == ident:
            return 0
        if i in depth:
            return depth[i]
        if i in on_stack:
            raise _Cyclic
        on_stack.add(i)
        val = 1 + max(visit(g.code[i * w + 1 + x]) for x in range(d))
        on_stack.discard(i)
        depth[i] = val
        return val

    if g.code == ic:
        return 0
    try:
        return visit(0)
    except _Cyclic:
        return None


class _Cyclic(Exception):
    pass


def portrait(g: Element, depth: int) -> list[tuple[int, ...]]:
    """Root permutations (as tuples) at every vertex of levels ``0..depth-1``,
    level by level, vertices in lexicographic order."""
    d = g.d
    w = d + 1
    perms = table(d).perms
    level = [0]
    out = []
    for _ in range(depth):
        out.extend(perms[g.code[i * w]] for i in level)
        level = [g.code[i * w + 1 + x] for i in level for x in range(d)]
    return out
