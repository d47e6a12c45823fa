"""Whole-group computations for automaton groups.

The symmetric generating set keeps one entry per distinct nontrivial element:
an involutive generator appears once, and a generator equal to another's
inverse is not repeated.  Ball sizes, Markov operators and relator searches
all use this set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .automaton import MealyAutomaton
from .element import (DEFAULT_SECTION_CAP, Element, Finite, Infinite, SectionCapExceeded,
                      automaton_elements, evaluate, mul_codes, order, verify_certificate)
from .permgroup import closure_order, schreier_sims, tree_chain
from .perms import table
from .words import GroupWord, format_word


@dataclass(frozen=True)
class Generator:
    label: str
    element: Element
    letter: tuple[int, int]     # (state index, +1/-1)
    involutive: bool


class GroupHandle:
    """An automaton group with cached level actions and stabilizer chains."""

    def __init__(self, automaton: MealyAutomaton, section_cap: int = DEFAULT_SECTION_CAP):
        self.automaton = automaton
        self.d = automaton.d
        self.section_cap = section_cap
        self.state_elements = [Element(e.d, e.code, section_cap) for e in automaton_elements(automaton)]
        gens: list[Generator] = []
        seen: set[Element] = {Element.identity(self.d)}
        for q, e in enumerate(self.state_elements):
            if e in seen:
                continue
            seen.add(e)
            inv = e.inverse()
            gens.append(Generator(automaton.states[q], e, (q, 1), inv == e))
        self.generators = gens
        sym = []
        for g in gens:
            sym.append(g)
        for g in gens:
            if g.involutive:
                continue
            inv = g.element.inverse()
            if any(s.element == inv for s in sym):
                continue
            sym.append(Generator(g.label + "^-1", inv, (g.letter[0], -1), False))
        self.symmetric = sym
        self._level_perms: dict[int, list[list[int]]] = {}
        self._chain = None

    # -- basics ---------------------------------------------------------
    @property
    def names(self) -> tuple[str, ...]:
        return self.automaton.states

    def word(self, text: str) -> GroupWord:
        return GroupWord.parse(text, self.names)

    def element(self, word: str | GroupWord) -> Element:
        w = self.word(word) if isinstance(word, str) else word
        return evaluate(w, self.state_elements)

    def identity(self) -> Element:
        return Element(self.d, Element.identity(self.d).code, self.section_cap)

    def is_trivial_group(self) -> bool:
        return not self.generators

    def level_perms(self, n: int) -> list[list[int]]:
        """Level-``n`` permutations of the (non-inverted) generators."""
        if n not in self._level_perms:
            self._level_perms[n] = [g.element.level_permutation(n) for g in self.generators]
        return self._level_perms[n]


# ----------------------------------------------------------------- growth

def growth_series(G: GroupHandle, radius: int, cap: int = 2_000_000) -> list[int]:
    """Sizes of balls of radius ``0..radius`` in the word metric."""
    d = G.d
    ident = Element.identity(d).code
    gens = [g.element.code for g in G.symmetric]
    seen = {ident}
    frontier = [ident]
    out = [1]
    for _ in range(radius):
        nxt = []
        for e in frontier:
            for s in gens:
                p = mul_codes(e, s, d, G.section_cap)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        if len(seen) > cap:
            raise SectionCapExceeded(f"ball exceeds {cap} elements")
        frontier = nxt
        out.append(len(seen))
    return out


def ball(G: GroupHandle, radius: int, cap: int | None = None) -> list[tuple[Element, tuple]]:
    """Elements of the ball in BFS order with a shortest word (letters)."""
    ident = G.identity()
    out = [(ident, ())]
    seen = {ident}
    frontier = [(ident, ())]
    for _ in range(radius):
        nxt = []
        for e, w in frontier:
            for s in G.symmetric:
                p = e * s.element
                if p not in seen:
                    seen.add(p)
                    item = (p, w + (s.letter,))
                    nxt.append(item)
                    out.append(item)
                    if cap is not None and len(out) >= cap:
                        return out
        frontier = nxt
    return out


# --------------------------------------------------------- level quotients

@dataclass
class LevelQuotient:
    level: int
    order: int
    base: list
    strong_generators: int

    @property
    def exponent(self) -> int | None:
        """``log_2`` of the order, or None when it is not a power of 2."""
        return self.order.bit_length() - 1 if self.order & (self.order - 1) == 0 else None


def _binary_chain(G: GroupHandle, n: int):
    if G._chain is None or G._chain.n < n:
        G._chain = tree_chain(G.level_perms(n), n)
    return G._chain


def level_quotient_order(G: GroupHandle, n: int) -> LevelQuotient:
    if n < 0:
        raise ValueError("level must be non-negative")
    if n == 0 or G.is_trivial_group():
        return LevelQuotient(n, 1, [], 0)
    if G.d == 2:
        chain = _binary_chain(G, n)
        exps = chain.level_exponents()
        base = [v for i, v in enumerate(chain.base) if len(v) <= n and i in chain.strong]
        strong = sum(1 for i in chain.strong if len(chain.base[i]) <= n)
        return LevelQuotient(n, 2 ** exps[n], base, strong)
    perms, order_pts = vertex_domain_perms(G, n)
    chain = schreier_sims(perms, len(order_pts), range(len(order_pts)))
    return LevelQuotient(n, chain.order, [order_pts[b] for b in chain.base],
                         len(chain.strong[0]) if chain.strong else 0)


def vertex_domain_perms(G: GroupHandle, n: int):
    """Generator permutations on all vertices of levels 1..n (BFS order)."""
    d = G.d
    verts = []
    offsets = []
    for k in range(1, n + 1):
        offsets.append(len(verts))
        for v in range(d ** k):
            verts.append(tuple((v // d ** (k - 1 - t)) % d for t in range(k)))
    perms = []
    for g in G.generators:
        img = []
        for k in range(1, n + 1):
            p = g.element.level_permutation(k)
            img.extend(offsets[k - 1] + p[v] for v in range(d ** k))
        perms.append(tuple(img))
    return perms, verts


def sf_exponents(G: GroupHandle, n: int) -> list[int]:
    """``log_2 |G/St_G(k)|`` for ``k = 0..n`` (binary alphabet)."""
    if G.d != 2:
        raise ValueError("exponent rows are defined for the binary alphabet")
    if G.is_trivial_group() or n == 0:
        return [0] * (n + 1)
    return _binary_chain(G, n).level_exponents()[:n + 1]


def closure_level_order(G: GroupHandle, n: int) -> int:
    """Level-``n`` quotient order by exhaustive closure (small ``n`` only)."""
    if n == 0:
        return 1
    return closure_order(G.level_perms(n))


def is_level_transitive(G: GroupHandle, n: int) -> bool:
    if n == 0:
        return True
    perms = G.level_perms(n)
    size = G.d ** n
    seen = {0}
    queue = [0]
    for v in queue:
        for p in perms:
            w = p[v]
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == size


# --------------------------------------------------------------- relators

def _letters(G: GroupHandle):
    """Search alphabet: one self-inverse letter per involutive generator,
    two mutually inverse letters otherwise."""
    out = []
    for g in G.generators:
        q = g.letter[0]
        if g.involutive:
            out.append(((q, 1), (q, 1), g.element, g.element))
        else:
            inv = g.element.inverse()
            out.append(((q, 1), (q, -1), g.element, inv))
            out.append(((q, -1), (q, 1), inv, g.element))
    return out


def _inv_letter(letter, involutive):
    q, e = letter
    return letter if q in involutive else (q, -e)


def _reduce_word(w, involutive):
    out = []
    for l in w:
        if out and out[-1] == _inv_letter(l, involutive):
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def _cyclic_reduce(w, involutive):
    w = _reduce_word(w, involutive)
    while len(w) >= 2 and w[0] == _inv_letter(w[-1], involutive):
        w = w[1:-1]
    return w


def _invert_word(w, involutive):
    return tuple(_inv_letter(l, involutive) for l in reversed(w))


def cyclic_normal_form(w, involutive=frozenset()):
    """Least rotation of ``w`` or its inverse."""
    if not w:
        return ()
    cands = []
    for u in (w, _invert_word(w, involutive)):
        for i in range(len(u)):
            cands.append(u[i:] + u[:i])
    return min(cands)


def _cyclically_contains(big, small, involutive):
    n = len(big)
    for u in (big, _invert_word(big, involutive)):
        doubled = u + u[:len(small) - 1]
        for i in range(n):
            if doubled[i:i + len(small)] == small:
                return True
    return False


@dataclass
class RelatorList:
    names: tuple[str, ...]
    relators: list[tuple]        # letter tuples; involutions listed as q^2
    max_len: int

    def as_text(self) -> list[str]:
        return [format_word(self.names, r) for r in self.relators]


def find_relators(G: GroupHandle, max_len: int, bucket_cap: int = 5_000_000) -> RelatorList:
    """Cyclically reduced relators of length ``<= max_len`` up to rotation and
    inversion, with relators containing a shorter one cyclically removed.

    Words ``u v^-1`` with ``u = v`` in the group are found by bucketing all
    reduced words of length ``<= ceil(max_len/2)`` by their element.
    Involutive generators are single self-inverse letters; their squares are
    reported separately as ``q^2``.
    """
    involutive = frozenset(g.letter[0] for g in G.generators if g.involutive)
    alpha = _letters(G)
    half = (max_len + 1) // 2
    d = G.d
    ident = Element.identity(d).code
    buckets: dict[tuple, list[tuple]] = {ident: [()]}
    layer = [((), ident)]
    total = 1
    for _ in range(half):
        nxt = []
        for w, code in layer:
            last_inv = _inv_letter(w[-1], involutive) if w else None
            for letter, _, el, _ in alpha:
                if letter == last_inv:
                    continue
                c = mul_codes(code, el.code, d, G.section_cap)
                nw = w + (letter,)
                buckets.setdefault(c, []).append(nw)
                nxt.append((nw, c))
                total += 1
                if total > bucket_cap:
                    raise SectionCapExceeded("relator search exceeds its word budget")
        layer = nxt
    found = set()
    for words in buckets.values():
        if len(words) < 2:
            continue
        for i, u in enumerate(words):
            for v in words[i + 1:]:
                if len(u) + len(v) > max_len:
                    continue
                r = _cyclic_reduce(u + _invert_word(v, involutive), involutive)
                if r:
                    found.add(cyclic_normal_form(r, involutive))
    ordered = sorted(found, key=lambda r: (len(r), r))
    kept: list[tuple] = []
    for r in ordered:
        if any(len(s) < len(r) and _cyclically_contains(r, s, involutive) for s in kept):
            continue
        kept.append(r)
    squares = [((q, 1), (q, 1)) for q in sorted(involutive)]
    trivial = [((q, 1),) for q, e in enumerate(G.state_elements) if e.is_trivial()]
    return RelatorList(G.names, trivial + squares + kept, max_len)


def verify_relator(G: GroupHandle, word: str | GroupWord) -> bool:
    return G.element(word).is_trivial()


# ---------------------------------------------------------------- nucleus

@dataclass
class Contracting:
    nucleus: list[Element]


@dataclass
class NonContracting:
    element: Element
    vertex: tuple[int, ...]
    word: str
    certificate: Infinite


@dataclass
class CapExceeded:
    reason: str


NucleusResult = Contracting | NonContracting | CapExceeded


def _recurrent_closure(elements: Iterable[Element]) -> set[Element]:
    """Elements lying on a cycle of the section graph of ``elements``, closed
    under taking sections."""
    nodes: dict[Element, list[Element]] = {}
    stack = list(elements)
    while stack:
        g = stack.pop()
        if g in nodes:
            continue
        secs = list(dict.fromkeys(g.sections()))
        nodes[g] = secs
        stack.extend(s for s in secs if s not in nodes)
    cyclic = _cyclic_nodes(nodes)
    out = set(cyclic)
    stack = list(cyclic)
    while stack:
        g = stack.pop()
        for s in nodes[g]:
            if s not in out:
                out.add(s)
                stack.append(s)
    return out


def _cyclic_nodes(graph: dict) -> set:
    """Nodes in a nontrivial strongly connected component or with a self-loop
    (iterative Tarjan)."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: set = set()
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            nxt = next(it, None)
            if nxt is not None:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph[nxt])))
                elif nxt in on_stack:
                    low[v] = min(low[v], index[nxt])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in graph[v]:
                    out.update(comp)
    return out


def self_section_vertex(g: Element, max_depth: int = 8) -> tuple[int, ...] | None:
    """Shortest vertex (then least) fixed by ``g`` where the section is ``g``."""
    d = g.d
    w = d + 1
    P = table(d).perms
    frontier = [(0, ())]
    seen = set()
    for _ in range(max_depth):
        nxt = []
        for i, v in frontier:
            p = P[g.code[i * w]]
            for x in range(d):
                if p[x] != x:
                    continue
                j = g.code[i * w + 1 + x]
                nv = v + (x,)
                if j == 0:
                    return nv
                if j not in seen:
                    seen.add(j)
                    nxt.append((j, nv))
        frontier = nxt
    return None


def noncontracting_witness(G: GroupHandle, radius: int = 4, cap: int = 2000,
                           max_depth: int = 8) -> NonContracting | None:
    """First ball element (BFS order) fixing a vertex with itself as section
    and certified to have infinite order."""
    for g, w in ball(G, radius, cap):
        if g.is_trivial():
            continue
        v = self_section_vertex(g, max_depth)
        if v is None:
            continue
        verdict = order(g)
        if isinstance(verdict, Infinite):
            return NonContracting(g, v, format_word(G.names, w), verdict)
    return None


def validate_witness(res: NonContracting) -> bool:
    g, v = res.element, res.vertex
    if g.act(v) != tuple(v) or g.section(v) != g:
        return False
    return verify_certificate(g, res.certificate.certificate)


def nucleus(G: GroupHandle, cap: int = 512, witness_radius: int = 4) -> NucleusResult:
    """Witness search for non-contraction, then a fixpoint search for the
    nucleus.

    A contracting group has no infinite-order element fixing a vertex with
    itself as section, so the two searches cannot both succeed.
    """
    witness = noncontracting_witness(G, witness_radius)
    if witness is not None:
        return witness
    ident = G.identity()
    N = _recurrent_closure([ident] + [s.element for s in G.symmetric]) | {ident}
    done: set[Element] = set()
    try:
        while len(N) <= cap:
            members = sorted(N, key=lambda e: (e.n_states, e.code))
            fresh = [g for g in members if g not in done]
            prods = [g * h for g in members for h in fresh] + [h * g for g in members for h in fresh]
            done.update(fresh)
            grown = N | _recurrent_closure(prods)
            if len(grown) == len(N):
                return Contracting(members)
            N = grown
    except SectionCapExceeded:
        pass
    return CapExceeded(f"nucleus candidate exceeds {cap} elements")


def nucleus_is_closed(N: Sequence[Element]) -> bool:
    """Section-closed, and every recurrent section of a product of two
    members is a member."""
    S = set(N)
    for g in N:
        if any(s not in S for s in g.sections()):
            return False
    prods = [g * h for g in N for h in N]
    return _recurrent_closure(prods) <= S


# ------------------------------------------------------- self-replication

def _cached(fn):
    def wrapper(G):
        key = "_cache_" + fn.__name__
        if key not in G.__dict__:
            G.__dict__[key] = fn(G)
        return G.__dict__[key]
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@dataclass
class SelfReplicating:
    witness: dict          # vertex -> {generator label: word over section generators}


@dataclass
class NotSelfReplicating:
    vertex: int
    level: int
    section_order: int
    group_order: int


@dataclass
class SelfReplicationUnknown:
    reason: str


SelfReplicationVerdict = SelfReplicating | NotSelfReplicating | SelfReplicationUnknown


@_cached
def stabilizer_generators(G: GroupHandle) -> list[Element]:
    """Schreier generators of the first-level stabilizer."""
    reps: dict[tuple, Element] = {}
    ident = G.identity()
    reps[ident.root_perm] = ident
    queue = [ident.root_perm]
    gens = [g.element for g in G.generators]
    for p in queue:
        u = reps[p]
        for s in gens:
            q = (s * u).root_perm
            if q not in reps:
                reps[q] = s * u
                queue.append(q)
    out = []
    seen = set()
    for p, u in reps.items():
        for s in gens:
            su = s * u
            h = reps[su.root_perm].inverse() * su
            if not h.is_trivial() and h not in seen:
                seen.add(h)
                out.append(h)
    return out


def _express(targets: dict[str, Element], gens: list[Element], max_len: int, cap: int):
    """Shortest words over ``gens`` (and inverses) for each target."""
    if not gens:
        return {k: [] for k, t in targets.items() if t.is_trivial()}
    letters = []
    for i, g in enumerate(gens):
        letters.append(((i, 1), g))
        inv = g.inverse()
        if inv != g:
            letters.append(((i, -1), inv))
    ident = Element.identity(gens[0].d)
    want = {t: k for k, t in targets.items()}
    found = {}
    if ident in want:
        found[want[ident]] = ()
    seen = {ident}
    frontier = [(ident, ())]
    for _ in range(max_len):
        if len(found) == len(targets):
            break
        nxt = []
        for e, w in frontier:
            for letter, g in letters:
                p = e * g
                if p in seen:
                    continue
                seen.add(p)
                nw = w + (letter,)
                if p in want and want[p] not in found:
                    found[want[p]] = nw
                nxt.append((p, nw))
                if len(seen) > cap:
                    return found
        frontier = nxt
    return found


def section_generators(G: GroupHandle, x: int) -> list[Element]:
    """Distinct nontrivial sections at ``x`` of the stabilizer generators."""
    secs = dict.fromkeys(h.section((x,)) for h in stabilizer_generators(G))
    return [s for s in secs if not s.is_trivial()]


def self_replicating(G: GroupHandle, max_len: int = 12, max_level: int = 6,
                     cap: int = 20_000) -> SelfReplicationVerdict:
    """Level-1 check suffices: if every first-level section map is onto, so
    is the section map at every deeper vertex."""
    targets = {g.label: g.element for g in G.generators}
    witness = {}
    undecided = []
    for x in range(G.d):
        secs = section_generators(G, x)
        no = _section_deficit(G, x, secs, max_level)
        if no is not None:
            return no
        try:
            found = _express(targets, secs, max_len, cap)
        except SectionCapExceeded:
            found = {}
        if len(found) == len(targets):
            names = [f"s{i}" for i in range(len(secs))]
            witness[x] = {
                "section_generators": [s.code for s in secs],
                "words": {k: format_word(names, w) for k, w in found.items()},
            }
        else:
            undecided.append(x)
    if undecided:
        return SelfReplicationUnknown(f"vertices {undecided} undecided within budgets")
    return SelfReplicating(witness)


def _section_deficit(G: GroupHandle, x: int, secs: list[Element], max_level: int):
    if G.d != 2:
        return None
    for n in range(1, max_level + 1):
        full = level_quotient_order(G, n).order
        if secs:
            sub = tree_chain([s.level_permutation(n) for s in secs], n).order(n)
        else:
            sub = 1
        if sub < full:
            return NotSelfReplicating(x, n, sub, full)
    return None


# ------------------------------------------------------------- finiteness

@dataclass
class FiniteGroup:
    order: int
    elements: list[Element]


@dataclass
class InfiniteWitness:
    element: Element
    word: str
    certificate: Infinite


@dataclass
class FinitenessUnknown:
    reason: str


def finiteness(G: GroupHandle, cap: int = 100_000, witness_cap: int = 200):
    if G.is_trivial_group():
        return FiniteGroup(1, [G.identity()])
    # cheap infinite certificates first
    for g, w in ball(G, 3, witness_cap):
        if g.is_trivial():
            continue
        v = order(g, max_nodes=512)
        if isinstance(v, Infinite):
            return InfiniteWitness(g, format_word(G.names, w), v)
    ident = G.identity()
    seen = {ident}
    elements = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for s in G.symmetric:
                p = e * s.element
                if p not in seen:
                    seen.add(p)
                    elements.append(p)
                    nxt.append(p)
                    if len(seen) > cap:
                        return FinitenessUnknown(f"more than {cap} elements")
        frontier = nxt
    return FiniteGroup(len(elements), elements)


def is_abelian(G: GroupHandle) -> bool:
    gens = [g.element for g in G.generators]
    for i, s in enumerate(gens):
        for t in gens[i + 1:]:
            if s * t != t * s:
                return False
    return True


def generator_orders(G: GroupHandle) -> list[str]:
    out = []
    for g in G.generators:
        v = order(g.element)
        if isinstance(v, Finite):
            out.append(str(v.order))
        elif isinstance(v, Infinite):
            out.append("inf")
        else:
            out.append("?")
    return out


# ------------------------------------------------------------ fingerprint

@dataclass(frozen=True)
class Fingerprint:
    sf: tuple
    gr: tuple
    abelian: bool
    generator_orders: tuple
    level_transitive: tuple

    def as_dict(self) -> dict:
        return {"sf": list(self.sf), "gr": list(self.gr), "abelian": self.abelian,
                "generator_orders": list(self.generator_orders),
                "level_transitive": list(self.level_transitive)}


def fingerprint(G: GroupHandle, sf_depth: int = 6, gr_radius: int = 4) -> Fingerprint:
    try:
        sf = tuple(sf_exponents(G, sf_depth))
    except Exception:  # budget failures degrade to a marker
        sf = ("unknown",)
    try:
        gr = tuple(growth_series(G, gr_radius, cap=200_000))
    except SectionCapExceeded:
        gr = ("unknown",)
    orders = tuple(sorted(generator_orders(G)))
    trans = tuple(is_level_transitive(G, n) for n in range(1, min(sf_depth, 6) + 1))
    return Fingerprint(sf, gr, is_abelian(G), orders, trans)


# ----------------------------------------------------------------- report

def verdict_json(v) -> dict:
    if isinstance(v, Contracting):
        return {"verdict": "contracting", "nucleus_size": len(v.nucleus)}
    if isinstance(v, NonContracting):
        return {"verdict": "non-contracting", "element": v.word,
                "vertex": "".join(map(str, v.vertex))}
    if isinstance(v, CapExceeded):
        return {"verdict": "unknown", "reason": v.reason}
    if isinstance(v, SelfReplicating):
        return {"verdict": "yes", "witness": {str(k): w["words"] for k, w in v.witness.items()}}
    if isinstance(v, NotSelfReplicating):
        return {"verdict": "no", "vertex": v.vertex, "level": v.level,
                "section_order": v.section_order, "group_order": v.group_order}
    if isinstance(v, SelfReplicationUnknown):
        return {"verdict": "unknown", "reason": v.reason}
    if isinstance(v, FiniteGroup):
        return {"verdict": "finite", "order": v.order}
    if isinstance(v, InfiniteWitness):
        return {"verdict": "infinite", "element": v.word}
    if isinstance(v, FinitenessUnknown):
        return {"verdict": "unknown", "reason": v.reason}
    raise TypeError(type(v))


def report(G: GroupHandle, sf_depth: int = 8, gr_radius: int = 5, max_len: int = 8) -> dict:
    fp = fingerprint(G, min(sf_depth, 6), min(gr_radius, 4))
    return {
        "sf": sf_exponents(G, sf_depth),
        "gr": growth_series(G, gr_radius),
        "relators": find_relators(G, max_len).as_text(),
        "contracting": verdict_json(nucleus(G)),
        "self_replicating": verdict_json(self_replicating(G)),
        "finite": verdict_json(finiteness(G)),
        "abelian": is_abelian(G),
        "fingerprint": fp.as_dict(),
    }
