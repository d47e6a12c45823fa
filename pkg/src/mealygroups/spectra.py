"""Schreier graphs of the level actions and spectra of their Markov operators.

The Markov operator on level ``n`` is the average of the permutation
matrices of the symmetric generating set.  It is assembled as an integer
count matrix over a common denominator, so symmetry is checked exactly before
any floating point enters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .group import GroupHandle

MAX_LEVEL = 12
HIST_BINS = 64


@dataclass(frozen=True)
class SchreierGraph:
    """Vertices are level-``n`` words indexed by value (first letter most
    significant); ``perms[i]`` is the action of generator ``labels[i]``."""

    level: int
    d: int
    labels: tuple[str, ...]
    perms: tuple[tuple[int, ...], ...]

    @property
    def n_vertices(self) -> int:
        return self.d ** self.level

    def edges(self) -> list[tuple[str, int, int]]:
        return [(lab, v, p[v]) for lab, p in zip(self.labels, self.perms)
                for v in range(self.n_vertices)]

    def components(self) -> list[int]:
        """Component id of every vertex."""
        n = self.n_vertices
        comp = [-1] * n
        c = 0
        for start in range(n):
            if comp[start] >= 0:
                continue
            comp[start] = c
            stack = [start]
            while stack:
                v = stack.pop()
                for p in self.perms:
                    u = p[v]
                    if comp[u] < 0:
                        comp[u] = c
                        stack.append(u)
            c += 1
        return comp

    def n_components(self) -> int:
        comp = self.components()
        return max(comp) + 1 if comp else 0

    def word(self, v: int) -> str:
        out = []
        for _ in range(self.level):
            v, x = divmod(v, self.d)
            out.append(str(x))
        return "".join(reversed(out))

    def to_dot(self) -> str:
        lines = [f"digraph schreier_{self.level} {{"]
        for v in range(self.n_vertices):
            lines.append(f'  {v} [label="{self.word(v)}"];')
        for lab, v, u in self.edges():
            lines.append(f'  {v} -> {u} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def edge_list(self) -> str:
        return "".join(f"{self.word(v)} {self.word(u)} {lab}\n" for lab, v, u in self.edges())


def schreier_graph(G: GroupHandle, n: int) -> SchreierGraph:
    if n < 0 or n > MAX_LEVEL:
        raise ValueError(f"level must be in 0..{MAX_LEVEL}")
    labels = []
    perms = []
    for g in G.symmetric:
        labels.append(g.label)
        perms.append(tuple(g.element.level_permutation(n)))
    return SchreierGraph(n, G.d, tuple(labels), tuple(perms))


@dataclass(frozen=True)
class MarkovMatrix:
    """``counts / denominator`` with ``counts[u, v] = #{s : s(v) = u}``."""

    counts: np.ndarray
    denominator: int

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    def is_symmetric(self) -> bool:
        return bool((self.counts == self.counts.T).all())

    def dense(self) -> np.ndarray:
        return self.counts / float(self.denominator)


def markov_matrix(G: GroupHandle, n: int) -> MarkovMatrix:
    """With no generators the operator is taken to be the identity."""
    graph = schreier_graph(G, n)
    size = graph.n_vertices
    counts = np.zeros((size, size), dtype=np.int64)
    cols = np.arange(size)
    for p in graph.perms:
        np.add.at(counts, (np.asarray(p, dtype=np.int64), cols), 1)
    if not graph.perms:
        counts = np.eye(size, dtype=np.int64)
        return MarkovMatrix(counts, 1)
    return MarkovMatrix(counts, len(graph.perms))


# ------------------------------------------------------------- Jacobi solver

@njit(cache=True)
def _sweep(A, W, use_w, drop):
    """One cyclic-by-row sweep of Jacobi rotations on symmetric ``A``, in
    place.  ``W`` holds eigenvectors as rows.  Entries below ``drop`` are
    zeroed instead of rotated; returns the sum of their squares."""
    n = A.shape[0]
    dropped = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = A[p, q]
            if apq == 0.0:
                continue
            if abs(apq) < drop:
                dropped += 2.0 * apq * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                continue
            app = A[p, p]
            aqq = A[q, q]
            theta = (aqq - app) / (2.0 * apq)
            t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
            if theta < 0:
                t = -t
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # rows p, q change outside the 2x2 block; columns mirror them
            for k in range(n):
                apk = A[p, k]
                aqk = A[q, k]
                A[p, k] = c * apk - s * aqk
                A[q, k] = s * apk + c * aqk
            for k in range(n):
                A[k, p] = A[p, k]
                A[k, q] = A[q, k]
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            A[p, q] = 0.0
            A[q, p] = 0.0
            if use_w:
                for k in range(n):
                    wp = W[p, k]
                    wq = W[q, k]
                    W[p, k] = c * wp - s * wq
                    W[q, k] = s * wp + c * wq
    return dropped


def off_diagonal_norm(A) -> float:
    return float(np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum()))


def jacobi_eigh(A, tol: float = 1e-10, max_sweeps: int = 60, vectors: bool = False):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi.

    Sweeps rotate every off-diagonal pair once, row by row, until the
    off-diagonal Frobenius norm drops below ``tol``.  Entries smaller than
    ``tol / n`` are set to zero rather than rotated (rounding noise inside
    degenerate clusters otherwise converges only linearly); the Frobenius
    norms of these perturbations are summed into ``dropped``, which with
    ``off_norm`` bounds the eigenvalue error.
    Returns ``(values, vectors or None, off_norm, sweeps, dropped)``;
    eigenvectors are columns.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    W = np.eye(n) if vectors else np.zeros((0, 0))
    sweeps = 0
    dropped = 0.0
    off = off_diagonal_norm(A)
    drop = tol / max(n, 1)
    while off >= tol and sweeps < max_sweeps:
        dropped += float(np.sqrt(_sweep(A, W, vectors, drop)))
        sweeps += 1
        off = off_diagonal_norm(A)
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], (W[order].T.copy() if vectors else None), off, sweeps, dropped


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def to_csv(self) -> str:
        rows = ["bin_lo,bin_hi,count"]
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            rows.append(f"{lo:.6f},{hi:.6f},{int(c)}")
        return "\n".join(rows) + "\n"


def histogram(values, bins: int = HIST_BINS) -> Histogram:
    """Uniform bins over [-1, 1]: half-open, the last one closed on the right.
    Values within rounding of the interval are clipped into it."""
    edges = np.linspace(-1.0, 1.0, bins + 1)
    v = np.clip(np.asarray(values, dtype=float), -1.0, 1.0)
    idx = np.floor((v + 1.0) / 2.0 * bins).astype(np.int64)
    idx = np.minimum(idx, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(edges, counts)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    tol: float
    off_norm: float
    sweeps: int
    residual: float | None = None   # max |Mv - lambda v| over sampled pairs
    dropped: float = 0.0
    level: int | None = None
    components: int | None = None

    def multiplicity(self, value: float, atol: float = 1e-8) -> int:
        return int((np.abs(self.eigenvalues - value) <= atol).sum())

    def histogram(self, bins: int = HIST_BINS) -> Histogram:
        return histogram(self.eigenvalues, bins)

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "mult_one": self.multiplicity(1.0),
            "components": self.components,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def spectrum(M, tol: float = 1e-10, samples: int = 16) -> SpectrumResult:
    """Spectrum of a symmetric matrix (a :class:`MarkovMatrix` or an array).

    Residuals are recomputed on up to ``samples`` evenly spread eigenpairs.
    """
    if isinstance(M, MarkovMatrix):
        if not M.is_symmetric():
            raise ValueError("Markov matrix is not symmetric")
        A = M.dense()
    else:
        A = np.asarray(M, dtype=float)
    vals, vecs, off, sweeps, dropped = jacobi_eigh(A, tol, vectors=samples > 0)
    residual = None
    if vecs is not None and len(vals):
        pick = np.unique(np.linspace(0, len(vals) - 1, min(samples, len(vals))).astype(int))
        R = A @ vecs[:, pick] - vecs[:, pick] * vals[pick]
        residual = float(np.abs(R).max())
    return SpectrumResult(vals, tol, off, sweeps, residual, dropped=dropped)


def level_spectrum(G: GroupHandle, n: int, tol: float = 1e-10, samples: int = 16) -> SpectrumResult:
    res = spectrum(markov_matrix(G, n), tol, samples)
    res.level = n
    res.components = schreier_graph(G, n).n_components()
    return res


@dataclass
class SpectrumUnion:
    levels: dict[int, SpectrumResult] = field(default_factory=dict)
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    histogram: Histogram | None = None


def spectrum_union(G: GroupHandle, N: int = 9, bins: int = HIST_BINS,
                   tol: float = 1e-10) -> SpectrumUnion:
    """Spectra of levels ``0..N`` merged; the histogram is of level ``N``,
    which contains all lower spectra."""
    levels = {n: level_spectrum(G, n, tol, samples=0) for n in range(N + 1)}
    merged = np.sort(np.concatenate([r.eigenvalues for r in levels.values()]))
    return SpectrumUnion(levels, merged, levels[N].histogram(bins))


def contained(small, large, atol: float = 1e-6) -> bool:
    """Every value of ``small`` lies within ``atol`` of some value of ``large``."""
    large = np.sort(np.asarray(large))
    if not len(small):
        return True
    if not len(large):
        return False
    idx = np.searchsorted(large, small)
    lo = large[np.clip(idx - 1, 0, len(large) - 1)]
    hi = large[np.clip(idx, 0, len(large) - 1)]
    return bool(np.all(np.minimum(np.abs(small - lo), np.abs(small - hi)) <= atol))
