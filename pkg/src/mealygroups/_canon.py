"""Partition refinement and BFS relabelling shared by automata and elements.

An automaton is given by two parallel lists: ``perm[i]`` (index into
:func:`mealygroups.perms.table`) and ``sec[i]`` (tuple of section states).
"""

from __future__ import annotations


def refine(perm, sec) -> list[int]:
    """Moore refinement; returns the class id of every state.

    Two states share a class iff they define the same tree automorphism.
    """
    n = len(perm)
    cls = list(perm)
    count = len(set(cls))
    while True:
        sig: dict = {}
        new = [0] * n
        for i in range(n):
            key = (cls[i],) + tuple([cls[j] for j in sec[i]])
            new[i] = sig.setdefault(key, len(sig))
        if len(sig) == count:
            return new
        count = len(sig)
        cls = new


def pointed_code(perm, sec, start: int, cls=None) -> tuple[int, ...]:
    """Canonical code of the automorphism defined by state ``start``.

    The code lists, for every class reachable from ``start`` in BFS order
    (letters visited in increasing order), its permutation index followed by
    the BFS numbers of its sections.
    """
    if cls is None:
        cls = refine(perm, sec)
    rep = {}
    for i, c in enumerate(cls):
        rep.setdefault(c, i)
    order = {cls[start]: 0}
    queue = [cls[start]]
    out: list[int] = []
    h = 0
    while h < len(queue):
        i = rep[queue[h]]
        h += 1
        out.append(perm[i])
        for j in sec[i]:
            cj = cls[j]
            k = order.get(cj)
            if k is None:
                k = order[cj] = len(queue)
                queue.append(cj)
            out.append(k)
    return tuple(out)
