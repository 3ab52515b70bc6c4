"""Directed graphs, bi-degree sequences, p0 sampling and sequence distances.

Nodes are labelled ``0..n-1`` inside the library. File formats and the CLI use
``1..n``; the conversion happens only in the readers/writers below.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernels import _expit_np


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Simple loopless directed graph stored as a dense boolean adjacency."""

    adj: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if adj.shape[0] < 2:
            raise ValueError("a graph needs at least 2 nodes")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        adj = adj.copy()
        adj.flags.writeable = False
        object.__setattr__(self, "adj", adj)

    @classmethod
    def empty(cls, n: int) -> "DirectedGraph":
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges) -> "DirectedGraph":
        """Build from 0-indexed ``(i, j)`` pairs. Duplicates are rejected."""
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if adj[i, j]:
                raise ValueError(f"duplicate edge ({i}, {j})")
            adj[i, j] = True
        return cls(adj)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        src, dst = np.nonzero(self.adj)
        return list(zip(src.tolist(), dst.tolist()))

    @property
    def num_edges(self) -> int:
        return int(self.adj.sum())

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return np.array_equal(self.adj, other.adj)

    __hash__ = None


def _frozen_vector(x, dtype=None):
    arr = np.array(x, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d vector")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BiSequence:
    """Paired out/in vectors of equal length. No range constraints."""

    outdeg: np.ndarray
    indeg: np.ndarray

    def __post_init__(self):
        out = _frozen_vector(self.outdeg)
        inn = _frozen_vector(self.indeg)
        if out.shape != inn.shape:
            raise ValueError("out and in halves must have equal length")
        object.__setattr__(self, "outdeg", out)
        object.__setattr__(self, "indeg", inn)

    @property
    def n(self) -> int:
        return self.outdeg.shape[0]

    def stacked(self) -> np.ndarray:
        """``(out_1..out_n, in_1..in_n)`` as one vector."""
        return np.concatenate([self.outdeg, self.indeg])

    def __eq__(self, other):
        if not isinstance(other, BiSequence):
            return NotImplemented
        return np.array_equal(self.outdeg, other.outdeg) and np.array_equal(self.indeg, other.indeg)

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(out={self.outdeg.tolist()}, in={self.indeg.tolist()})"


class BiDegreeSequence(BiSequence):
    """Integer out/in degree vectors, typically produced by :func:`degrees`."""

    def __post_init__(self):
        for name in ("outdeg", "indeg"):
            v = np.asarray(getattr(self, name))
            if v.dtype.kind == "f" and not np.all(np.mod(v, 1) == 0):
                raise ValueError("degrees must be integers")
            object.__setattr__(self, name, v.astype(np.int64))
        super().__post_init__()


class NoisyBiSequence(BiSequence):
    """A released bi-sequence; entries may be negative or exceed ``n - 1``.

    Integer under the discrete mechanism, float under the continuous one.
    """


def degrees(g: DirectedGraph) -> BiDegreeSequence:
    return BiDegreeSequence(g.adj.sum(axis=1), g.adj.sum(axis=0))


def edge_probabilities(alpha, beta) -> np.ndarray:
    """``P[i, j] = exp(a_i + b_j) / (1 + exp(a_i + b_j))`` with a zero diagonal."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    p = _expit_np(alpha[:, None] + beta[None, :])
    np.fill_diagonal(p, 0.0)
    return p


def sample_p0(params, rng: np.random.Generator) -> DirectedGraph:
    """Draw one graph from the p0 model; every ordered pair is an independent Bernoulli."""
    p = edge_probabilities(params.alpha, params.beta)
    adj = rng.random(p.shape) < p
    np.fill_diagonal(adj, False)
    return DirectedGraph(adj)


def _pair(a: BiSequence, b: BiSequence):
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    return a.stacked(), b.stacked()


def dist_inf(a: BiSequence, b: BiSequence):
    """max(|a+ - b+|_inf, |a- - b-|_inf)."""
    x, y = _pair(a, b)
    return np.abs(x - y).max()


def dist_l1(a: BiSequence, b: BiSequence):
    x, y = _pair(a, b)
    return np.abs(x - y).sum()


# --------------------------------------------------------------------------
# I/O
# --------------------------------------------------------------------------

def read_edge_list(path, n: int | None = None) -> DirectedGraph:
    """Read a tab-separated, 1-indexed edge list. ``#`` starts a comment.

    ``n`` defaults to the largest label seen.
    """
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two node labels")
            i, j = int(parts[0]), int(parts[1])
            if i < 1 or j < 1:
                raise ValueError(f"{path}:{lineno}: labels are 1-indexed")
            edges.append((i - 1, j - 1))
    top = max((max(e) for e in edges), default=-1) + 1
    if n is None:
        n = max(top, 2)
    elif top > n:
        raise ValueError(f"label {top} exceeds n={n}")
    return DirectedGraph.from_edges(n, edges)


def write_edge_list(g: DirectedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j in g.edges:
            fh.write(f"{i + 1}\t{j + 1}\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def write_bisequence_csv(seq: BiSequence, path, columns=("out", "in")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", *columns])
        for k, (o, i) in enumerate(zip(seq.outdeg, seq.indeg), 1):
            w.writerow([k, _fmt(o), _fmt(i)])


def _parse_number(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def read_bisequence_csv(path, cls=BiSequence) -> BiSequence:
    """Read ``node,<out>,<in>`` rows (any header names) in node order."""
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0].strip() != "node":
        raise ValueError(f"{path}: missing 'node,...' header")
    body = [r for r in rows[1:] if r and r[0].strip()]
    body.sort(key=lambda r: int(r[0]))
    labels = [int(r[0]) for r in body]
    if labels != list(range(1, len(body) + 1)):
        raise ValueError(f"{path}: node labels must be 1..n")
    out = [_parse_number(r[1].strip()) for r in body]
    inn = [_parse_number(r[2].strip()) for r in body]
    if all(isinstance(v, int) for v in out + inn):
        return cls(np.array(out, dtype=np.int64), np.array(inn, dtype=np.int64))
    return cls(np.array(out, dtype=float), np.array(inn, dtype=float))
