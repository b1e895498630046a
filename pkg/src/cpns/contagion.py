"""Discrete-time SI dynamics, infection spanning trees, epidemic edge importance.

Every step, each edge between an infected and a susceptible vertex transmits
independently with probability ``1 - (1 - gamma)**w_e``. Vertices infected at
step t start transmitting at step t + 1. A vertex hit by several edges in the
same step credits one of them, chosen uniformly.

The simulator skips quiet steps exactly: with boundary weight ``W`` the chance
that nothing happens in a step is ``(1 - gamma)**W``, so the wait until the
next transmission is geometric. At that step the successful edges are drawn
conditionally on at least one success (first success by inverse CDF, the
rest independently). This has the same law as stepping one tick at a time.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .graph import WeightedGraph, connected_components
from .seeding import run_rng

MAX_STEPS = 10**9


def transmission_prob(w, gamma):
    """pi = 1 - (1 - gamma)**w, computed without cancellation."""
    if not 0 < gamma < 1:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and > 0")
    pi = -np.expm1(w * math.log1p(-gamma))
    return float(pi) if pi.ndim == 0 else pi


@dataclass(frozen=True)
class SIConfig:
    gamma: float
    timesteps: int
    patient_zero: int
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.timesteps < 1:
            raise ValidationError("timesteps must be >= 1")
        if self.patient_zero < 0:
            raise ValidationError("patient_zero must be a vertex id")

    def validate_for(self, g: WeightedGraph):
        if self.patient_zero >= g.n:
            raise ValidationError(f"patient_zero {self.patient_zero} not in [0, {g.n})")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """``states[t]`` is the 0/1 infection vector after t steps; ``states[0]`` is the seed state."""

    states: np.ndarray  # (T, N) bool
    patient_zero: int
    seed: int

    @property
    def timesteps(self) -> int:
        return self.states.shape[0]

    def fraction_series(self) -> np.ndarray:
        return self.states.mean(axis=1)

    def state_strings(self):
        return ["".join("1" if x else "0" for x in row) for row in self.states]


@dataclass(frozen=True, eq=False)
class InfectionTree:
    edges: np.ndarray  # transmitting edge indices, sorted
    patient_zero: int
    infection_time: np.ndarray  # step at which each vertex was infected, -1 if never


@dataclass(frozen=True, eq=False)
class ImportanceTable:
    graph: WeightedGraph
    eei: np.ndarray
    leverage: np.ndarray
    gamma: float
    runs_per_source: int
    seed: int

    @property
    def normalized_eei(self) -> np.ndarray:
        return _by_max(self.eei, "eei")

    @property
    def normalized_leverage(self) -> np.ndarray:
        return _by_max(self.leverage, "leverage")


def _by_max(x, name):
    top = float(np.max(x)) if x.size else 0.0
    if top <= 0:
        raise ValidationError(f"{name} column is all zero; cannot normalize")
    return x / top


class _Spreader:
    """Precomputed per-graph state shared by many runs."""

    def __init__(self, g: WeightedGraph, gamma: float):
        if not 0 < gamma < 1:
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
        self.g = g
        self.log_survive = math.log1p(-gamma)
        self.pi = -np.expm1(g.w * self.log_survive)

    def spread(self, patient_zero, rng, max_steps):
        """Run until the source component saturates or time exceeds ``max_steps``.

        Returns ``(infection_time, parent_edge, saturated)``.
        """
        g = self.g
        u, v, w = g.u, g.v, g.w
        infected = np.zeros(g.n, dtype=bool)
        infected[patient_zero] = True
        time = np.full(g.n, -1, dtype=np.int64)
        time[patient_zero] = 0
        parent = np.full(g.n, -1, dtype=np.int64)
        t = 0
        while True:
            boundary = np.flatnonzero(infected[u] != infected[v])
            if boundary.size == 0:
                return time, parent, True
            cum = np.cumsum(w[boundary])
            p_any = -math.expm1(self.log_survive * cum[-1])
            t += int(rng.geometric(p_any))
            if t > max_steps:
                return time, parent, False
            # first success among boundary edges, conditional on at least one
            f = -np.expm1(self.log_survive * cum)
            i = min(int(np.searchsorted(f, rng.random() * p_any, side="right")), boundary.size - 1)
            rest = boundary[i + 1:]
            hits = np.concatenate(([boundary[i]], rest[rng.random(rest.size) < self.pi[rest]]))
            targets = np.where(infected[u[hits]], v[hits], u[hits])
            if hits.size > 1:
                order = rng.permutation(hits.size)
                hits, targets = hits[order], targets[order]
                targets, first = np.unique(targets, return_index=True)
                hits = hits[first]
            infected[targets] = True
            time[targets] = t
            parent[targets] = hits


def si_run(g: WeightedGraph, cfg: SIConfig, rng: np.random.Generator | None = None) -> Trajectory:
    """Simulate ``cfg.timesteps`` states (the first being the seed state)."""
    cfg.validate_for(g)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    time, _, _ = _Spreader(g, cfg.gamma).spread(cfg.patient_zero, rng, cfg.timesteps - 1)
    return Trajectory(_states_from_times(time, cfg.timesteps), cfg.patient_zero, cfg.seed)


def _states_from_times(time, timesteps):
    steps = np.arange(timesteps)[:, None]
    return (time[None, :] >= 0) & (time[None, :] <= steps)


def _run_times(args):
    g, gamma, timesteps, patient_zero, seed, stream, run_ids = args
    spreader = _Spreader(g, gamma)
    return [spreader.spread(patient_zero, run_rng(seed, stream, r), timesteps - 1)[0] for r in run_ids]


def si_runs(g: WeightedGraph, gamma, timesteps, patient_zero, runs, seed, stream=0, workers=1):
    """``runs`` independent trajectories; run r uses stream ``(seed, stream, r)``."""
    cfg = SIConfig(gamma, timesteps, patient_zero, seed)
    cfg.validate_for(g)
    if workers > 1 and runs > 1:
        tasks = [(g, gamma, timesteps, patient_zero, seed, stream, range(i, runs, workers)) for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_times, tasks))
        times = [None] * runs
        for i, part in enumerate(parts):
            times[i::workers] = part
    else:
        times = _run_times((g, gamma, timesteps, patient_zero, seed, stream, range(runs)))
    return [Trajectory(_states_from_times(t, timesteps), patient_zero, seed) for t in times]


def infection_tree(g: WeightedGraph, gamma, patient_zero, seed=0, rng=None, _spreader=None) -> InfectionTree:
    """Edges that transmitted in one SI run continued until the source component is infected."""
    if not 0 <= patient_zero < g.n:
        raise ValidationError(f"patient_zero {patient_zero} not in [0, {g.n})")
    if rng is None:
        rng = np.random.default_rng(seed)
    spreader = _spreader or _Spreader(g, gamma)
    time, parent, done = spreader.spread(patient_zero, rng, MAX_STEPS)
    if not done:
        raise ConvergenceError(f"component of {patient_zero} not saturated after {MAX_STEPS} steps")
    return InfectionTree(np.sort(parent[parent >= 0]), patient_zero, time)


def _source_counts(args):
    g, gamma, sources, runs, seed = args
    spreader = _Spreader(g, gamma)
    counts = np.zeros(g.m, dtype=np.int64)
    for s in sources:
        for r in range(runs):
            tree = infection_tree(g, gamma, s, rng=run_rng(seed, s, r), _spreader=spreader)
            counts[tree.edges] += 1
    return counts


def epidemic_edge_importance(g: WeightedGraph, gamma, runs_per_source=100, seed=0, leverage=None,
                             workers=1, progress=None) -> ImportanceTable:
    """Fraction of infection trees containing each edge, over every source and run.

    An edge is only reachable from sources in its own component, so the
    denominator for edge e is ``runs_per_source * |component(e)|``; on a
    connected graph that is every (source, run) pair.
    """
    if runs_per_source < 1:
        raise ValidationError("runs_per_source must be >= 1")
    if leverage is None:
        from .spectral import exact_resistance

        leverage = exact_resistance(g).leverage
    leverage = np.asarray(leverage, dtype=float)
    count, labels = connected_components(g)
    sizes = np.bincount(labels, minlength=count)
    # sources in isolated components contribute nothing
    sources = [s for s in range(g.n) if sizes[labels[s]] > 1]
    chunks = [sources[i::max(workers, 1)] for i in range(max(workers, 1))] if workers > 1 else [sources]
    tasks = [(g, gamma, c, runs_per_source, seed) for c in chunks if c]
    counts = np.zeros(g.m, dtype=np.int64)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(_source_counts, tasks):
                counts += part
    else:
        for i, s in enumerate(sources):
            counts += _source_counts((g, gamma, [s], runs_per_source, seed))
            if progress:
                progress(i + 1, len(sources))
    denom = runs_per_source * sizes[labels[g.u]]
    eei = counts / denom if g.m else np.zeros(0)
    return ImportanceTable(g, eei, leverage, float(gamma), int(runs_per_source), int(seed))


def save_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "fraction_infected"])
        for t, f in enumerate(traj.fraction_series()):
            out.writerow([t, repr(float(f))])


def save_states_packed(traj: Trajectory, path) -> None:
    """Bit-packed (T, ceil(N/8)) uint8 array in .npy format."""
    np.save(path, np.packbits(traj.states, axis=1))


def save_importance_tsv(table: ImportanceTable, path) -> None:
    g = table.graph
    with open(path, "w") as fh:
        fh.write("u\tv\tw\tleverage\teei\n")
        for a, b, w, lev, e in zip(g.u, g.v, g.w, table.leverage, table.eei):
            fh.write(f"{a}\t{b}\t{float(w)!r}\t{float(lev)!r}\t{float(e)!r}\n")
