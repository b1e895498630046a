"""Edge-sampling sparsifiers.

Both strategies draw ``q`` edges with replacement from a distribution ``p``
and give each drawn edge weight ``count_e * w_e / (p_e * q)``, so every
weight (and hence the Laplacian) is preserved in expectation. ``ss``
samples proportionally to leverage ``w_e R_e``; ``uniform`` is the null model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import WeightedGraph, save_edge_list
from .spectral import ResistanceSketch

STRATEGIES = ("ss", "uniform")


@dataclass(frozen=True, eq=False)
class Sparsifier:
    graph: WeightedGraph
    strategy: str
    q: int
    seed: int
    source_index: np.ndarray  # edge index in the original graph, per sparsifier edge
    counts: np.ndarray  # times each kept edge was drawn
    source_m: int
    target_fraction: float | None = None
    epsilon: float | None = None

    @property
    def fraction_kept(self) -> float:
        return self.graph.m / self.source_m if self.source_m else 0.0

    def sidecar(self) -> dict:
        return {
            "strategy": self.strategy,
            "q": self.q,
            "fraction": self.target_fraction,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "edges": self.graph.m,
        }


def sample_edges(g: WeightedGraph, p, q: int, seed: int, strategy: str, target_fraction=None,
                 epsilon=None) -> Sparsifier:
    """Draw ``q`` edges from ``p`` by inverse-CDF lookup and reweight them."""
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}")
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    p = np.asarray(p, dtype=float)
    if p.shape != (g.m,):
        raise ValidationError(f"distribution has {p.size} entries for {g.m} edges")
    if g.m == 0:
        raise ValidationError("cannot sample from a graph without edges")
    cdf = np.cumsum(p)
    rng = np.random.default_rng(seed)
    draws = np.searchsorted(cdf, rng.random(q) * cdf[-1], side="right")
    np.minimum(draws, g.m - 1, out=draws)
    counts = np.bincount(draws, minlength=g.m)
    kept = np.flatnonzero(counts)
    pn = p / cdf[-1]
    w_new = counts[kept] * g.w[kept] / (pn[kept] * q)
    sub = WeightedGraph(g.n, g.u[kept], g.v[kept], w_new)
    return Sparsifier(sub, strategy, int(q), int(seed), kept, counts[kept], g.m, target_fraction, epsilon)


def ss_sample(g: WeightedGraph, sketch: ResistanceSketch, q: int, seed: int, target_fraction=None) -> Sparsifier:
    if sketch.graph is not g and (sketch.graph.n != g.n or sketch.graph.m != g.m
                                  or not np.array_equal(sketch.graph.u, g.u)
                                  or not np.array_equal(sketch.graph.v, g.v)
                                  or not np.array_equal(sketch.graph.w, g.w)):
        raise ValidationError("resistance sketch was computed for a different graph")
    return sample_edges(g, sketch.leverage, q, seed, "ss", target_fraction, sketch.epsilon)


def uniform_sample(g: WeightedGraph, q: int, seed: int, target_fraction=None) -> Sparsifier:
    return sample_edges(g, np.full(g.m, 1.0 / max(g.m, 1)), q, seed, "uniform", target_fraction)


def expected_distinct(p, q) -> float:
    """E[# distinct edges] after q draws: sum_e 1 - (1 - p_e)^q."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):  # p == 1 gives log1p(-1) = -inf, which is fine
        return float(-np.expm1(q * np.log1p(-np.minimum(p, 1.0))).sum())


def q_for_fraction(g: WeightedGraph, p, fraction: float) -> int:
    """Smallest q whose expected distinct-edge count reaches ``fraction * m``.

    The target is capped at ``m - 0.5`` since full coverage is only reached
    in the limit.
    """
    if not 0 < fraction <= 1:
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction}")
    p = np.asarray(p, dtype=float)
    if p.shape != (g.m,) or g.m == 0:
        raise ValidationError("distribution must have one entry per edge of a non-empty graph")
    p = p / p.sum()
    target = min(fraction * g.m, g.m - 0.5)
    hi = 1
    while expected_distinct(p, hi) < target:
        hi *= 2
        if hi > 2**62:
            raise ValidationError("target fraction unreachable for this distribution")
    lo = hi // 2 + 1 if hi > 1 else 1
    while lo < hi:
        mid = (lo + hi) // 2
        if expected_distinct(p, mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    return hi


def embeddedness(sketch: ResistanceSketch, e) -> float:
    """1 - w_e R_e for edge index ``e`` or endpoint pair ``(a, b)``."""
    g = sketch.graph
    if isinstance(e, tuple):
        try:
            e = g.edge_index(*e)
        except KeyError:
            raise ValidationError(f"edge {e} not in graph") from None
    if not 0 <= e < g.m:
        raise ValidationError(f"edge index {e} out of range")
    return float(max(0.0, 1.0 - sketch.leverage[e]))


def save_sparsifier(sp: Sparsifier, path) -> Path:
    """Write the edge list and a ``.json`` sidecar next to it; returns the sidecar path."""
    path = Path(path)
    save_edge_list(sp.graph, path)
    side = path.with_suffix(".json")
    side.write_text(json.dumps(sp.sidecar(), indent=2, sort_keys=True) + "\n")
    return side
