"""Directed graphicality, star decompositions and L1 denoising.

Everything here is driven by one greedy routine
(:func:`bidegree.kernels.greedy_projection`): repeatedly take the unprocessed
node with the largest out-value (lowest index on ties) as a star center and
point it at the nodes with the largest remaining in-values. Ties among
in-values go to the node with more unspent out-capacity, then to the lower
index. Run on a graphical sequence it realizes the sequence exactly; run on
an arbitrary integer sequence it returns the closest graphical sequence in L1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import BiDegreeSequence, BiSequence, DirectedGraph, degrees


@dataclass(frozen=True)
class NormalOrderPermutation:
    """``perm[k]`` is the original node placed at position ``k``."""

    perm: tuple[int, ...]

    def apply(self, d: BiSequence) -> BiSequence:
        p = np.asarray(self.perm)
        return type(d)(d.outdeg[p], d.indeg[p])


@dataclass(frozen=True)
class KOutStar:
    center: int
    leaves: frozenset[int]

    def __post_init__(self):
        if self.center in self.leaves:
            raise ValueError("a star cannot point at its own center")

    @property
    def k(self) -> int:
        return len(self.leaves)

    def sequence(self, n: int) -> BiDegreeSequence:
        out = np.zeros(n, dtype=np.int64)
        inn = np.zeros(n, dtype=np.int64)
        out[self.center] = self.k
        inn[list(self.leaves)] = 1
        return BiDegreeSequence(out, inn)


@dataclass(frozen=True)
class HHDecomposition:
    n: int
    stars: tuple[KOutStar, ...]

    def total(self) -> BiDegreeSequence:
        out = np.zeros(self.n, dtype=np.int64)
        inn = np.zeros(self.n, dtype=np.int64)
        for s in self.stars:
            seq = s.sequence(self.n)
            out += seq.outdeg
            inn += seq.indeg
        return BiDegreeSequence(out, inn)

    def graph(self) -> DirectedGraph:
        return DirectedGraph.from_edges(self.n, [(s.center, j) for s in self.stars for j in s.leaves])


def _as_int_halves(d: BiSequence):
    out = np.asarray(d.outdeg)
    inn = np.asarray(d.indeg)
    if not (np.all(np.mod(out, 1) == 0) and np.all(np.mod(inn, 1) == 0)):
        raise ValueError("bi-sequence must be integer valued")
    return out.astype(np.int64), inn.astype(np.int64)


def _greedy(out, inn):
    return kernels.greedy_projection(np.ascontiguousarray(out), np.ascontiguousarray(inn))


def is_bigraphical(d: BiSequence) -> bool:
    """True iff some simple loopless digraph on ``d.n`` nodes has bi-degrees ``d``."""
    out, inn = _as_int_halves(d)
    n = out.shape[0]
    if out.min(initial=0) < 0 or inn.min(initial=0) < 0:
        return False
    if out.max(initial=0) > n - 1 or inn.max(initial=0) > n - 1:
        return False
    if out.sum() != inn.sum():
        return False
    src, dst = _greedy(out, inn)
    return src.shape[0] == out.sum()


def normal_order(d: BiSequence) -> NormalOrderPermutation:
    """Sort by in-value descending, then out-value descending, then index."""
    out = np.asarray(d.outdeg)
    inn = np.asarray(d.indeg)
    perm = np.lexsort((np.arange(out.shape[0]), -out, -inn))
    return NormalOrderPermutation(tuple(int(p) for p in perm))


def _stars_from_edges(n, src, dst) -> HHDecomposition:
    stars = []
    start = 0
    for k in range(1, src.shape[0] + 1):
        if k == src.shape[0] or src[k] != src[start]:
            stars.append(KOutStar(int(src[start]), frozenset(int(j) for j in dst[start:k])))
            start = k
    return HHDecomposition(n, tuple(stars))


def hh_decompose(d: BiSequence) -> HHDecomposition:
    """Split a graphical bi-degree sequence into out-stars with distinct centers."""
    if not is_bigraphical(d):
        raise ValueError(f"not bigraphical: {d!r}")
    out, inn = _as_int_halves(d)
    src, dst = _greedy(out, inn)
    return _stars_from_edges(out.shape[0], src, dst)


def denoise_l1(z: BiSequence) -> tuple[BiDegreeSequence, DirectedGraph]:
    """Closest graphical bi-degree sequence to ``z`` in L1, plus a graph realizing it.

    Coordinates ``<= 0`` map to 0 and every other coordinate can only shrink.
    """
    out, inn = _as_int_halves(z)
    n = out.shape[0]
    src, dst = _greedy(out, inn)
    adj = np.zeros((n, n), dtype=bool)
    adj[src, dst] = True
    g = DirectedGraph(adj)
    return degrees(g), g
