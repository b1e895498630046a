import numpy as np
import pytest

from cpns import WeightedGraph

_ACCEPTANCE = []


def random_connected_graph(rng, n, extra=None, wmin=0.1, wmax=10.0, unit=False):
    """Random spanning tree plus ``extra`` random chords, random weights."""
    edges = {}
    for v in range(1, n):
        edges[(int(rng.integers(0, v)), v)] = 1.0
    extra = n if extra is None else extra
    for _ in range(extra):
        a, b = rng.choice(n, 2, replace=False)
        edges[(int(min(a, b)), int(max(a, b)))] = 1.0
    keys = sorted(edges)
    w = np.ones(len(keys)) if unit else rng.uniform(wmin, wmax, len(keys))
    return WeightedGraph.from_edges(n, [(a, b, float(x)) for (a, b), x in zip(keys, w)])


def random_graph(rng, n, p, wmin=0.1, wmax=10.0):
    """Erdos-Renyi G(n, p) with random weights; may be disconnected."""
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return WeightedGraph(n, iu[keep], iv[keep], rng.uniform(wmin, wmax, int(keep.sum())))


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {detail}")
