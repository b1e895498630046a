"""Fidelity metrics between SI trajectories and edge-importance statistics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateError, ValidationError

METRICS = ("hamming", "mi", "fraction")
Z95 = 1.96


def _as_bits(a):
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValidationError("state vector must be one-dimensional")
    return a.astype(bool)


def _pair(a, b):
    a, b = _as_bits(a), _as_bits(b)
    if a.size != b.size:
        raise ValidationError(f"length mismatch: {a.size} != {b.size}")
    return a, b


def hamming(a, b) -> int:
    a, b = _pair(a, b)
    return int(np.count_nonzero(a != b))


def _mi_bits(n11, n10, n01, n00, total):
    """Mutual information in bits from 2x2 contingency counts (broadcasts)."""
    total = np.asarray(total, dtype=float)
    cells = [np.asarray(c, dtype=float) for c in (n11, n10, n01, n00)]
    row1, row0 = cells[0] + cells[1], cells[2] + cells[3]
    col1, col0 = cells[0] + cells[2], cells[1] + cells[3]
    margins = [(row1, col1), (row1, col0), (row0, col1), (row0, col0)]
    mi = np.zeros(np.broadcast(*cells).shape)
    for c, (r, k) in zip(cells, margins):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = c / total * np.log2(c * total / (r * k))
        mi += np.where(c > 0, term, 0.0)
    return np.maximum(mi, 0.0)


def mutual_information(a, b) -> float:
    """MI (bits) of the empirical joint distribution of paired bits (a_v, b_v)."""
    a, b = _pair(a, b)
    if a.size == 0:
        raise ValidationError("state vectors must be non-empty")
    n11 = np.count_nonzero(a & b)
    n10 = np.count_nonzero(a & ~b)
    n01 = np.count_nonzero(~a & b)
    return float(_mi_bits(n11, n10, n01, a.size - n11 - n10 - n01, a.size))


def entropy_bits(a) -> float:
    a = _as_bits(a)
    p = a.mean()
    return float(-sum(x * np.log2(x) for x in (p, 1 - p) if x > 0))


def fraction_infected(a) -> float:
    a = _as_bits(a)
    if a.size == 0:
        raise ValidationError("state vector must be non-empty")
    return float(np.count_nonzero(a) / a.size)


@dataclass(frozen=True, eq=False)
class MetricSeries:
    mean: np.ndarray
    half_width: np.ndarray
    metric: str
    count: int  # observations per timestep (runs or run pairs)
    label: str = ""

    @property
    def ci_lo(self):
        return self.mean - self.half_width

    @property
    def ci_hi(self):
        return self.mean + self.half_width

    def __len__(self):
        return self.mean.size

    def rows(self):
        for t, (m, lo, hi) in enumerate(zip(self.mean, self.ci_lo, self.ci_hi)):
            yield [t, repr(float(m)), repr(float(lo)), repr(float(hi)), self.metric, self.label]

    def within(self, other: "MetricSeries") -> np.ndarray:
        """Per-timestep flag: is this series' mean inside ``other``'s CI band?"""
        return (self.mean >= other.ci_lo) & (self.mean <= other.ci_hi)


def write_series_csv(series, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "mean", "ci_lo", "ci_hi", "metric", "label"])
        for s in series:
            out.writerows(s.rows())


def _stack(trajectories):
    trajectories = list(trajectories)
    if not trajectories:
        raise ValidationError("need at least one trajectory")
    shapes = {t.states.shape for t in trajectories}
    if len(shapes) != 1:
        raise ValidationError(f"trajectories differ in shape: {sorted(shapes)}")
    zeros = {t.patient_zero for t in trajectories}
    if len(zeros) != 1:
        raise ValidationError(f"trajectories use different patient zeros: {sorted(zeros)}")
    return np.stack([t.states for t in trajectories]).astype(np.float64), zeros.pop()


def _summarize(values, metric, label):
    """values: (count, T) observations -> MetricSeries with normal-approximation 95% CI."""
    count = values.shape[0]
    mean = values.mean(axis=0)
    if count > 1:
        half = Z95 * values.std(axis=0, ddof=1) / np.sqrt(count)
    else:
        half = np.zeros_like(mean)
    return MetricSeries(mean, half, metric, count, label)


def _pairwise(x, y, metric, pairs):
    """Metric per timestep for the given (i, j) index pairs of x (R1,T,N), y (R2,T,N)."""
    n = x.shape[2]
    ii, jj = (np.array(p, dtype=np.int64) for p in zip(*pairs))
    out = np.empty((ii.size, x.shape[1]))
    for t in range(x.shape[1]):
        a, b = x[:, t, :], y[:, t, :]
        gram = a @ b.T
        sa, sb = a.sum(axis=1), b.sum(axis=1)
        n11 = gram[ii, jj]
        if metric == "hamming":
            out[:, t] = sa[ii] + sb[jj] - 2.0 * n11
        else:
            n10 = sa[ii] - n11
            n01 = sb[jj] - n11
            out[:, t] = _mi_bits(n11, n10, n01, n - n11 - n10 - n01, n)
    return out


def _check_metric(metric):
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")


def baseline(trajectories, metric: str, label: str = "baseline") -> MetricSeries:
    """Per-timestep mean and 95% CI among runs on the original network.

    ``fraction`` averages over runs; ``hamming`` and ``mi`` over all unordered run pairs.
    """
    _check_metric(metric)
    x, _ = _stack(trajectories)
    if x.shape[0] < 2:
        raise ValidationError("baseline needs at least two runs")
    if metric == "fraction":
        return _summarize(x.mean(axis=2), metric, label)
    pairs = list(combinations(range(x.shape[0]), 2))
    return _summarize(_pairwise(x, x, metric, pairs), metric, label)


def compare_series(original, cpns, metric: str, label: str = "cpns") -> MetricSeries:
    """Metric between original and sparsifier runs over all cross pairs.

    For ``fraction`` this is just the mean series of the sparsifier runs.
    """
    _check_metric(metric)
    x, pz = _stack(original)
    y, pz2 = _stack(cpns)
    if x.shape[1:] != y.shape[1:]:
        raise ValidationError(f"shape mismatch: {x.shape[1:]} vs {y.shape[1:]}")
    if pz != pz2:
        raise ValidationError(f"patient zero differs: {pz} vs {pz2}")
    if metric == "fraction":
        return _summarize(y.mean(axis=2), metric, label)
    pairs = [(i, j) for i in range(x.shape[0]) for j in range(y.shape[0])]
    return _summarize(_pairwise(x, y, metric, pairs), metric, label)


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson_r needs two equal-length 1-d sequences")
    if x.size < 2:
        raise ValidationError("pearson_r needs at least two points")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(dx @ dx), np.sqrt(dy @ dy)
    for s, v in ((sx, x), (sy, y)):
        if s <= 1e-12 * max(1.0, float(np.abs(v).max())) * np.sqrt(v.size):
            raise DegenerateError("zero variance; correlation undefined")
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


def importance_pairs(table, mode: str = "paired") -> np.ndarray:
    """(normalized EEI, normalized leverage) rows, each column scaled by its max.

    ``paired`` keeps per-edge pairing; ``quantile`` sorts both columns
    independently (Q-Q pairing).
    """
    if table.graph.m == 0:
        raise ValidationError("importance table is empty")
    a, b = table.normalized_eei, table.normalized_leverage
    if mode == "quantile":
        a, b = np.sort(a), np.sort(b)
    elif mode != "paired":
        raise ValidationError(f"unknown pairing mode {mode!r}")
    return np.column_stack([a, b])


def importance_correlation(table, mode: str = "paired") -> float:
    pairs = importance_pairs(table, mode)
    return pearson_r(pairs[:, 0], pairs[:, 1])
