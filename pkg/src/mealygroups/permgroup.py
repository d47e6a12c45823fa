"""Permutation groups: deterministic Schreier-Sims and a brute-force oracle.

Permutations are tuples of images on ``range(n)``.  ``mul(p, q)`` applies
``q`` first, then ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


def mul(p, q):
    return tuple([p[i] for i in q])


def inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def is_identity(p) -> bool:
    return all(i == j for i, j in enumerate(p))


@dataclass
class StabilizerChain:
    degree: int
    base: list[int] = field(default_factory=list)
    strong: list[list[tuple]] = field(default_factory=list)  # generators of G^(i)
    transversals: list[dict[int, tuple]] = field(default_factory=list)

    @property
    def order(self) -> int:
        out = 1
        for t in self.transversals:
            out *= len(t)
        return out

    def orbit_sizes(self) -> list[int]:
        return [len(t) for t in self.transversals]

    def sift(self, g, start: int = 0):
        """Strip ``g`` through levels ``start..``; returns (residue, level)."""
        for i in range(start, len(self.base)):
            b = g[self.base[i]]
            u = self.transversals[i].get(b)
            if u is None:
                return g, i
            g = mul(inv(u), g)
        return g, len(self.base)

    def contains(self, g) -> bool:
        res, _ = self.sift(tuple(g))
        return is_identity(res)


def schreier_sims(generators: Iterable[Sequence[int]], degree: int,
                  base_order: Sequence[int] | None = None) -> StabilizerChain:
    """Stabilizer chain of the group generated by ``generators``.

    New base points are taken as the first point of ``base_order`` moved by
    the element that needs one.
    """
    order_pts = list(base_order) if base_order is not None else list(range(degree))
    ident = tuple(range(degree))
    chain = StabilizerChain(degree)
    checked: list[set] = []

    def new_level(g):
        for p in order_pts:
            if g[p] != p and p not in chain.base:
                chain.base.append(p)
                chain.strong.append([])
                chain.transversals.append({p: ident})
                checked.append(set())
                return
        raise ValueError("element moves no point outside the base")

    def add_strong(g, upto):
        # g fixes base[0..upto-1]; it belongs to every G^(j) for j <= upto
        if upto == len(chain.base):
            new_level(g)
        for j in range(upto + 1):
            chain.strong[j].append(g)
            _extend_orbit(chain, j)

    for g in generators:
        g = tuple(g)
        if is_identity(g):
            continue
        res, lvl = chain.sift(g)
        if not is_identity(res):
            add_strong(res, lvl)

    i = len(chain.base) - 1
    while i >= 0:
        restarted = False
        trans = chain.transversals[i]
        gens = chain.strong[i]
        for x in list(trans):
            ux = trans[x]
            for k, s in enumerate(gens):
                if (x, k) in checked[i]:
                    continue
                y = s[x]
                h = mul(inv(trans[y]), mul(s, ux))
                res, lvl = chain.sift(h, i + 1)
                checked[i].add((x, k))
                if not is_identity(res):
                    add_strong(res, lvl)
                    i = lvl
                    restarted = True
                    break
            if restarted:
                break
        if not restarted:
            i -= 1
    return chain


def _extend_orbit(chain: StabilizerChain, j: int):
    trans = chain.transversals[j]
    gens = chain.strong[j]
    queue = list(trans)
    h = 0
    while h < len(queue):
        x = queue[h]
        h += 1
        ux = trans[x]
        for s in gens:
            y = s[x]
            if y not in trans:
                trans[y] = mul(s, ux)
                queue.append(y)


def closure_order(generators: Iterable[Sequence[int]], cap: int = 1 << 20) -> int:
    """Group order by exhaustive closure (oracle for small groups)."""
    gens = [tuple(g) for g in generators]
    if not gens:
        return 1
    ident = tuple(range(len(gens[0])))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for s in gens:
                p = mul(s, e)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
                    if len(seen) > cap:
                        raise RuntimeError("closure exceeds cap")
        frontier = nxt
    return len(seen)


# ------------------------------------------------ binary-tree quotients

@dataclass
class TreeChain:
    """Stabilizer chain of a group acting on a binary tree truncated at level
    ``n``, with one base vertex per sibling pair in breadth-first order.

    Every basic orbit has size 1 or 2, and fixing the base vertices of levels
    ``<= k`` fixes all of level ``k``; so the level-``k`` quotient order is
    ``2^(number of nontrivial orbits on levels <= k)``.
    """

    n: int
    base: list[tuple[int, ...]]      # base vertices as letter tuples
    strong: dict[int, tuple]         # base position -> element moving that vertex
    sifts: int

    def level_exponents(self) -> list[int]:
        counts = [0] * (self.n + 1)
        for i in self.strong:
            counts[len(self.base[i])] += 1
        out = []
        total = 0
        for c in counts:
            total += c
            out.append(total)
        return out

    def order(self, level: int | None = None) -> int:
        k = self.n if level is None else level
        return 2 ** self.level_exponents()[k]


def tree_chain(leaf_perms: Iterable[Sequence[int]], n: int) -> TreeChain:
    """Chain for the group generated by permutations of the ``2^n`` leaves
    (leaf index = binary value, first letter most significant)."""
    size = 1 << n
    leaves, shifts, base = [], [], []
    for k in range(1, n + 1):
        for v in range(0, 1 << k, 2):
            leaves.append(v << (n - k))
            shifts.append(n - k)
            base.append(tuple((v >> (k - 1 - t)) & 1 for t in range(k)))
    leaves_a = np.array(leaves, dtype=np.int64)
    shifts_a = np.array(shifts, dtype=np.int64)
    verts = leaves_a >> shifts_a
    strong: dict[int, tuple] = {}
    arange = np.arange(size)

    def first_moved(g):
        if not len(leaves):
            return -1
        moved = (g[leaves_a] >> shifts_a) != verts
        i = int(moved.argmax())
        return i if moved[i] else -1

    def sift(g):
        while True:
            i = first_moved(g)
            if i < 0 or i not in strong:
                return g, i
            g = strong[i][1][g]

    queue = [np.asarray(p, dtype=np.int64) for p in leaf_perms]
    sifts = 0
    while queue:
        g = queue.pop()
        sifts += 1
        r, i = sift(g)
        if i < 0:
            continue
        r_inv = np.empty_like(r)
        r_inv[r] = arange
        # Schreier generators pairing the new element with the chain
        queue.append(r[r])
        for j, (t, t_inv) in strong.items():
            if j > i:
                queue.append(r[t[r_inv]])
            else:
                queue.append(t[r[t_inv]])
        strong[i] = (r, r_inv)
    return TreeChain(n, base, {i: tuple(int(x) for x in t) for i, (t, _) in strong.items()}, sifts)
