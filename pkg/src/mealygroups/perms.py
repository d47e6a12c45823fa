"""Permutation tables for a fixed alphabet size.

Permutations of ``range(d)`` are stored as tuples (image lists) and referred
to by their index in :func:`table`.  Index 0 is always the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations


@dataclass(frozen=True)
class PermTable:
    d: int
    perms: tuple[tuple[int, ...], ...]
    index: dict
    compose: tuple[tuple[int, ...], ...]  # compose[p][q] = p o q
    inverse: tuple[int, ...]

    def of(self, perm) -> int:
        return self.index[tuple(perm)]


@lru_cache(maxsize=None)
def table(d: int) -> PermTable:
    if d < 2:
        raise ValueError("alphabet size must be at least 2")
    if d > 6:
        raise ValueError("alphabets larger than 6 letters are not supported")
    perms = tuple(permutations(range(d)))
    index = {p: i for i, p in enumerate(perms)}
    compose = tuple(
        tuple(index[tuple(p[q[x]] for x in range(d))] for q in perms) for p in perms
    )
    inverse = []
    for p in perms:
        inv = [0] * d
        for x, y in enumerate(p):
            inv[y] = x
        inverse.append(index[tuple(inv)])
    return PermTable(d, perms, index, compose, tuple(inverse))


def cycles_of(perm) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        out.append(tuple(cyc))
    return out


def from_cycles(d: int, cycles) -> tuple[int, ...]:
    """Build a permutation from disjoint cycles."""
    img = list(range(d))
    used: set[int] = set()
    for cyc in cycles:
        if len(set(cyc)) != len(cyc) or used & set(cyc):
            raise ValueError(f"cycles must be disjoint, got {cycles}")
        used.update(cyc)
        for i, x in enumerate(cyc):
            img[x] = cyc[(i + 1) % len(cyc)]
    return tuple(img)
