"""Weighted undirected simple graphs, Laplacians and edge-list I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import EdgeListParseError, ValidationError


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted simple graph on vertices ``0..n-1``.

    Edges are stored canonically (``u < v``) and sorted by ``(u, v)``; the
    position in that order is the edge index used everywhere else.
    Construct with :meth:`from_edges` or pass arrays directly.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        u = np.asarray(self.u, dtype=np.int64).ravel()
        v = np.asarray(self.v, dtype=np.int64).ravel()
        w = np.asarray(self.w, dtype=np.float64).ravel()
        if not (u.shape == v.shape == w.shape):
            raise ValidationError("edge arrays must have equal length")
        if u.size:
            if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
                raise ValidationError(f"vertex id out of range [0, {n})")
            if np.any(u == v):
                i = int(np.flatnonzero(u == v)[0])
                raise ValidationError(f"self-loop at vertex {int(u[i])}")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValidationError("edge weights must be finite and > 0")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                i = int(np.flatnonzero(dup)[0]) + 1
                raise ValidationError(f"duplicate edge ({int(lo[i])}, {int(hi[i])})")
        for arr in (lo, hi, w):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "u", lo)
        object.__setattr__(self, "v", hi)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_edges(cls, n, edges):
        edges = list(edges)
        if not edges:
            return cls(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        cols = list(zip(*edges))
        if len(cols) == 2:
            cols.append([1.0] * len(edges))
        return cls(n, np.array(cols[0]), np.array(cols[1]), np.array(cols[2], dtype=float))

    @property
    def m(self) -> int:
        return int(self.u.size)

    def edges(self):
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def edge_index(self, a, b) -> int:
        """Index of edge {a, b}; raises KeyError if absent."""
        a, b = min(a, b), max(a, b)
        lo = np.searchsorted(self.u, a, side="left")
        hi = np.searchsorted(self.u, a, side="right")
        j = lo + np.searchsorted(self.v[lo:hi], b)
        if j < hi and self.v[j] == b:
            return int(j)
        raise KeyError((a, b))

    def adjacency(self) -> sp.csr_matrix:
        a = sp.coo_matrix(
            (np.concatenate([self.w, self.w]), (np.concatenate([self.u, self.v]), np.concatenate([self.v, self.u]))),
            shape=(self.n, self.n),
        )
        return a.tocsr()

    def incidence(self) -> sp.csr_matrix:
        """Signed m x n incidence matrix, +1 at u and -1 at v."""
        rows = np.repeat(np.arange(self.m), 2)
        cols = np.column_stack([self.u, self.v]).ravel()
        vals = np.tile([1.0, -1.0], self.m)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.m, self.n))

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        np.add.at(d, self.u, self.w)
        np.add.at(d, self.v, self.w)
        return d

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


def laplacian(g: WeightedGraph, dense: bool = False):
    """L = D - A. Sparse CSR by default."""
    a = g.adjacency()
    lap = sp.diags(g.degrees()) - a
    if dense:
        return lap.toarray()
    return lap.tocsr()


def connected_components(g: WeightedGraph):
    """Return ``(count, labels)``; labels are numbered by smallest vertex."""
    count, labels = _cc(g.adjacency(), directed=False)
    return int(count), labels.astype(np.int64)


def load_edge_list(path) -> WeightedGraph:
    """Read a ``u v w`` edge list. ``# n=<count>`` overrides the vertex count."""
    path = Path(path)
    n_header = None
    us, vs, ws = [], [], []
    seen = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    try:
                        n_header = int(body[2:])
                    except ValueError:
                        raise EdgeListParseError(path, lineno, f"bad header {line!r}") from None
                continue
            parts = line.split()
            if len(parts) != 3:
                raise EdgeListParseError(path, lineno, f"expected 'u v w', got {line!r}")
            try:
                a, b, c = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise EdgeListParseError(path, lineno, f"cannot parse {line!r}") from None
            if a < 0 or b < 0:
                raise EdgeListParseError(path, lineno, "negative vertex id")
            if a == b:
                raise EdgeListParseError(path, lineno, f"self-loop at vertex {a}")
            if not math.isfinite(c) or c <= 0:
                raise EdgeListParseError(path, lineno, f"weight must be finite and > 0, got {parts[2]}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise EdgeListParseError(path, lineno, f"duplicate edge {key} (first on line {seen[key]})")
            seen[key] = lineno
            us.append(a)
            vs.append(b)
            ws.append(c)
    n = 1 + max(max(us, default=-1), max(vs, default=-1))
    if n_header is not None:
        if n_header < n:
            raise EdgeListParseError(path, 1, f"header n={n_header} smaller than max vertex id + 1 = {n}")
        n = n_header
    if n < 1:
        raise EdgeListParseError(path, 1, "empty edge list without '# n=' header")
    return WeightedGraph(n, np.array(us, np.int64), np.array(vs, np.int64), np.array(ws))


def save_edge_list(g: WeightedGraph, path) -> None:
    lines = [f"# n={g.n}\n"]
    lines += [f"{a}\t{b}\t{c!r}\n" for a, b, c in g.edges()]
    with open(path, "w") as fh:
        fh.writelines(lines)
