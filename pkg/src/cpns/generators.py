"""Random network families used in the experiments.

* ``configuration-explog``: configuration model, degrees drawn from the
  exponential-logarithmic distribution, unit weights.
* ``sbm4``: stochastic block model with equal blocks, unit weights.
* ``complete-normal`` / ``complete-powerlaw``: K_n with random positive weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .graph import WeightedGraph

FAMILIES = ("configuration-explog", "sbm4", "complete-normal", "complete-powerlaw")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    seed: int = 0
    # configuration-explog
    explog_p: float = 0.5
    explog_beta: float = 0.05
    # sbm4
    blocks: int = 4
    p_in: float = 0.05
    p_out: float = 0.005
    # complete-normal
    normal_mean: float = 1.0
    normal_sd: float = 0.25
    normal_floor: float = 1e-6
    # complete-powerlaw (density ~ x^-alpha for x >= xmin)
    powerlaw_alpha: float = 2.5
    powerlaw_min: float = 100.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 2:
            raise ValidationError("n must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if not 0 < self.explog_p < 1 or self.explog_beta <= 0:
            raise ValidationError("exponential-logarithmic needs 0 < p < 1 and beta > 0")
        if self.family == "sbm4" and not 1 <= self.blocks <= self.n:
            raise ValidationError("blocks must be in [1, n]")
        for name in ("p_in", "p_out"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValidationError(f"{name} must be a probability")
        if self.normal_sd < 0 or self.normal_floor <= 0:
            raise ValidationError("normal weights need sd >= 0 and floor > 0")
        if self.powerlaw_alpha <= 1 or self.powerlaw_min <= 0:
            raise ValidationError("power law needs alpha > 1 and xmin > 0")

    def block_sizes(self):
        base, extra = divmod(self.n, self.blocks)
        return [base + (i < extra) for i in range(self.blocks)]

    def to_dict(self):
        return asdict(self)


def generate(spec: GeneratorSpec) -> WeightedGraph:
    rng = np.random.default_rng(spec.seed)
    if spec.family == "configuration-explog":
        return _configuration_explog(spec, rng)
    if spec.family == "sbm4":
        return _sbm(spec, rng)
    iu, iv = np.triu_indices(spec.n, 1)
    if spec.family == "complete-normal":
        w = rng.normal(spec.normal_mean, spec.normal_sd, iu.size)
        w = np.maximum(w, spec.normal_floor)
    else:
        w = powerlaw_weights(rng, iu.size, spec.powerlaw_alpha, spec.powerlaw_min)
    return WeightedGraph(spec.n, iu, iv, w)


def powerlaw_weights(rng, size, alpha, xmin):
    """Continuous power law, density proportional to x**-alpha on [xmin, inf)."""
    u = rng.random(size)
    return xmin * (1.0 - u) ** (-1.0 / (alpha - 1.0))


def explog_sample(rng, size, p, beta):
    """Inverse-CDF draws from the exponential-logarithmic distribution."""
    u = rng.random(size)
    return -np.log((1.0 - p ** (1.0 - u)) / (1.0 - p)) / beta


def is_graphical(deg) -> bool:
    """Erdos-Gallai test for a simple-graph degree sequence."""
    d = np.sort(np.asarray(deg, dtype=np.int64))[::-1]
    if d.sum() % 2:
        return False
    n = d.size
    k = np.arange(1, n + 1)
    lhs = np.cumsum(d)
    # sum_{i > k} min(d_i, k), for every k
    rhs_tail = np.array([np.minimum(d[i:], i).sum() for i in range(1, n + 1)])
    return bool(np.all(lhs <= k * (k - 1) + rhs_tail))


def explog_degrees(rng, n, p, beta):
    """Degree sequence clamped to [1, n-1], resampled until even-sum and graphical."""
    while True:
        x = explog_sample(rng, n, p, beta)
        deg = np.clip(np.ceil(x), 1, n - 1).astype(np.int64)
        if deg.sum() % 2 == 0 and is_graphical(deg):
            return deg


def _configuration_explog(spec, rng, max_restarts=1000, max_rounds=200):
    n = spec.n
    for _ in range(max_restarts):
        deg = explog_degrees(rng, n, spec.explog_p, spec.explog_beta)
        edges = _match_stubs(np.repeat(np.arange(n), deg), rng, max_rounds)
        if edges is not None:
            u, v = zip(*edges) if edges else ((), ())
            return WeightedGraph(n, np.array(u, np.int64), np.array(v, np.int64), np.ones(len(edges)))
    raise ValidationError("could not realize a simple configuration-model graph; adjust explog parameters")


def _match_stubs(stubs, rng, max_rounds):
    """Pair stubs at random; loop/multi-edge pairs go back to the pool.

    When a round makes no progress the leftover pairs are placed by a
    degree-preserving switch against a random existing edge. Returns None if
    that fails too.
    """
    edges = set()
    pool = stubs
    for _ in range(max_rounds):
        if pool.size == 0:
            return sorted(edges)
        pool = rng.permutation(pool)
        rejected = []
        for a, b in zip(pool[0::2].tolist(), pool[1::2].tolist()):
            key = (a, b) if a < b else (b, a)
            if a == b or key in edges:
                rejected += [a, b]
            else:
                edges.add(key)
        if len(rejected) == pool.size and edges:
            for a, b in zip(rejected[0::2], rejected[1::2]):
                if not _switch_in(edges, a, b, rng):
                    return None
            return sorted(edges)
        pool = np.array(rejected, dtype=np.int64)
    return None


def _switch_in(edges, a, b, rng, tries=1000):
    """Replace some edge (c, d) by (a, c) and (b, d), keeping all degrees."""
    existing = list(edges)
    for _ in range(tries):
        c, d = existing[int(rng.integers(len(existing)))]
        if rng.random() < 0.5:
            c, d = d, c
        e1 = (min(a, c), max(a, c))
        e2 = (min(b, d), max(b, d))
        if a == c or b == d or e1 == e2 or e1 in edges or e2 in edges:
            continue
        edges.discard((min(c, d), max(c, d)))
        edges.add(e1)
        edges.add(e2)
        return True
    return False


def _sbm(spec, rng):
    sizes = spec.block_sizes()
    block = np.repeat(np.arange(len(sizes)), sizes)
    iu, iv = np.triu_indices(spec.n, 1)
    prob = np.where(block[iu] == block[iv], spec.p_in, spec.p_out)
    keep = rng.random(iu.size) < prob
    return WeightedGraph(spec.n, iu[keep], iv[keep], np.ones(int(keep.sum())))


def sbm_blocks(spec: GeneratorSpec) -> np.ndarray:
    """Block label per vertex for an sbm4 spec."""
    return np.repeat(np.arange(spec.blocks), spec.block_sizes())


def explog_mean(p, beta):
    """Mean of the exponential-logarithmic distribution, -Li2(1-p) / (beta ln p)."""
    z = 1.0 - p
    li2 = sum(z**k / k**2 for k in range(1, 2000))
    return -li2 / (beta * math.log(p))
