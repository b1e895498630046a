"""Effective resistances: exact (dense pseudoinverse), JL sketch, matrix-tree oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardExceeded, ValidationError
from .graph import WeightedGraph, connected_components, laplacian
from .solvers import laplacian_pcg

EXACT_MAX_N = 5000
MATRIX_TREE_MAX_N = 12
JL_CONSTANT = 24.0


@dataclass(frozen=True, eq=False)
class ResistanceSketch:
    """Per-edge effective resistances and leverage scores ``w_e * R_e``.

    ``pinv`` holds the (block-diagonal) Laplacian pseudoinverse in exact
    mode; ``projection`` holds the k x n sketch ``Z`` in approximate mode.
    Either one answers pairwise queries via :func:`pair_resistance`.
    """

    graph: WeightedGraph
    resistance: np.ndarray
    leverage: np.ndarray
    method: str
    labels: np.ndarray
    n_components: int
    epsilon: float | None = None
    pinv: np.ndarray | None = None
    projection: np.ndarray | None = None
    seed: int | None = None

    def leverage_sum(self) -> float:
        return float(self.leverage.sum())


def _pinv_blocks(g, labels, count):
    lap = laplacian(g, dense=True)
    pinv = np.zeros((g.n, g.n))
    for c in range(count):
        idx = np.flatnonzero(labels == c)
        if idx.size == 1:
            continue
        vals, vecs = np.linalg.eigh(lap[np.ix_(idx, idx)])
        keep = vals > 1e-10 * vals[-1]
        block = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T
        pinv[np.ix_(idx, idx)] = block
    return pinv


def exact_resistance(g: WeightedGraph) -> ResistanceSketch:
    if g.n > EXACT_MAX_N:
        raise GuardExceeded(f"exact resistance limited to n <= {EXACT_MAX_N} (got n={g.n}); use approx_resistance")
    count, labels = connected_components(g)
    pinv = _pinv_blocks(g, labels, count)
    d = np.diag(pinv)
    res = d[g.u] + d[g.v] - 2.0 * pinv[g.u, g.v]
    lev = g.w * res
    return ResistanceSketch(g, res, lev, "exact", labels, count, pinv=pinv)


def jl_dimension(n, epsilon, constant=JL_CONSTANT):
    return max(1, math.ceil(constant * math.log(n) / epsilon**2))


def approx_resistance(g: WeightedGraph, epsilon: float, seed: int = 0, constant: float = JL_CONSTANT,
                      chunk: int = 1024) -> ResistanceSketch:
    """(1 +/- epsilon)-approximate resistances via a random projection.

    Builds ``Z = Q W^{1/2} B L^+`` with ``Q`` a k x m matrix of +/-1/sqrt(k)
    entries, ``k = ceil(constant * ln n / epsilon**2)``, solving each row with
    Jacobi-preconditioned CG to relative residual ``epsilon * 1e-2``.
    """
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    count, labels = connected_components(g)
    k = jl_dimension(g.n, epsilon, constant)
    lap = laplacian(g)
    bw = g.incidence().multiply(np.sqrt(g.w)[:, None]).tocsr()  # W^{1/2} B, m x n
    rng = np.random.default_rng(seed)
    z = np.zeros((k, g.n))
    scale = 1.0 / math.sqrt(k)
    for start in range(0, k, chunk):
        rows = min(chunk, k - start)
        if g.m:
            q = np.where(rng.random((rows, g.m)) < 0.5, -scale, scale)
            y = (bw.T @ q.T)  # n x rows, columns are rows of Q W^{1/2} B
            x, _ = laplacian_pcg(lap, y, labels, count, rtol=epsilon * 1e-2)
            z[start:start + rows] = x.T
    diff = z[:, g.u] - z[:, g.v]
    res = np.einsum("ij,ij->j", diff, diff)
    lev = np.minimum(g.w * res, 1.0)
    return ResistanceSketch(g, res, lev, "jl-approx", labels, count, epsilon=epsilon, projection=z, seed=seed)


def pair_resistance(sketch: ResistanceSketch, i: int, j: int) -> float:
    """R_ij; ``inf`` when i and j lie in different components."""
    n = sketch.graph.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"vertex out of range [0, {n})")
    if i == j:
        return 0.0
    if sketch.labels[i] != sketch.labels[j]:
        return math.inf
    if sketch.pinv is not None:
        p = sketch.pinv
        return float(p[i, i] + p[j, j] - 2.0 * p[i, j])
    d = sketch.projection[:, i] - sketch.projection[:, j]
    return float(d @ d)


def _tree_weight(lap):
    """Weighted spanning-tree count: any cofactor of the Laplacian."""
    if lap.shape[0] == 1:
        return 1.0
    return float(np.linalg.det(lap[1:, 1:]))


def spanning_tree_edge_probability(g: WeightedGraph) -> np.ndarray:
    """P(e in T) for T drawn with probability proportional to its weight product.

    Weighted matrix-tree theorem: ``w_e * tau(G / e) / tau(G)`` where ``G / e``
    contracts ``e`` (parallel edges merge by adding weights).
    """
    if g.n > MATRIX_TREE_MAX_N:
        raise GuardExceeded(f"matrix-tree oracle limited to n <= {MATRIX_TREE_MAX_N} (got n={g.n})")
    count, _ = connected_components(g)
    if count != 1:
        raise ValidationError("matrix-tree oracle needs a connected graph")
    lap = laplacian(g, dense=True)
    total = _tree_weight(lap)
    probs = np.empty(g.m)
    for e, (a, b, w) in enumerate(g.edges()):
        # merge b into a: add row/column b onto a, then delete b
        c = lap.copy()
        c[a, :] += c[b, :]
        c[:, a] += c[:, b]
        keep = np.arange(g.n) != b
        probs[e] = w * _tree_weight(c[np.ix_(keep, keep)]) / total
    return probs
