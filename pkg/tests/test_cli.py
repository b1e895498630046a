import json
from pathlib import Path

import numpy as np
import pytest

import cpns.cli as cli
from cpns import ConvergenceError, WeightedGraph
from cpns.graph import load_edge_list, save_edge_list


def run(*argv):
    return cli.main([str(a) for a in argv], _exit=False)


def read_tsv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split("\t")
    return header, [dict(zip(header, l.split("\t"))) for l in lines[1:]]


@pytest.fixture
def sbm(tmp_path):
    assert run("generate", "--family", "sbm4", "--n", 500, "--seed", 1, "--out-dir", tmp_path, "--output", "sbm.tsv") == 0
    return tmp_path / "sbm.tsv"


def test_generate_sbm_unit_weights_and_deterministic(tmp_path, sbm):
    g = load_edge_list(sbm)
    assert g.n == 500 and np.all(g.w == 1.0)
    other = tmp_path / "again"
    assert run("generate", "--family", "sbm4", "--n", 500, "--seed", 1, "--out-dir", other, "--output", "sbm.tsv") == 0
    assert (other / "sbm.tsv").read_bytes() == sbm.read_bytes()
    manifest = json.loads((tmp_path / "generate.manifest.json").read_text())
    assert manifest["params"]["p_in"] == 0.05 and "--p-in" in manifest["argv"]


def test_bad_family_is_usage_error(tmp_path, capsys):
    assert run("generate", "--family", "nope", "--n", 10, "--out-dir", tmp_path) == 2


def test_resist_tree_leverage_one(tmp_path):
    g = WeightedGraph.from_edges(5, [(0, 1, 2.0), (1, 2, 0.5), (1, 3, 1.0), (3, 4, 7.0)])
    save_edge_list(g, tmp_path / "tree.tsv")
    assert run("resist", tmp_path / "tree.tsv", "--out-dir", tmp_path) == 0
    header, rows = read_tsv(tmp_path / "tree.resist.tsv")
    assert header == ["u", "v", "w", "R", "leverage"]
    assert all(float(r["leverage"]) == pytest.approx(1.0) for r in rows)


def test_resist_disconnected_has_component_column(tmp_path):
    save_edge_list(WeightedGraph.from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]), tmp_path / "d.tsv")
    assert run("resist", tmp_path / "d.tsv", "--out-dir", tmp_path) == 0
    header, rows = read_tsv(tmp_path / "d.resist.tsv")
    assert header[-1] == "component"
    assert [r["component"] for r in rows] == ["0", "0", "1"]


def test_resist_approx_within_epsilon_of_exact(tmp_path, rng):
    from conftest import random_connected_graph

    save_edge_list(random_connected_graph(rng, 50, extra=60), tmp_path / "g.tsv")
    for mode in ("exact", "approx"):
        assert run("resist", tmp_path / "g.tsv", "--mode", mode, "--epsilon", 0.1, "--seed", 3,
                   "--out-dir", tmp_path, "--output", f"{mode}.tsv") == 0
    _, ex = read_tsv(tmp_path / "exact.tsv")
    _, ap = read_tsv(tmp_path / "approx.tsv")
    ratio = np.array([float(a["R"]) / float(e["R"]) for a, e in zip(ap, ex)])
    assert np.max(np.abs(ratio - 1)) <= 0.1


def test_sparsify_fraction_monotone_and_realized(tmp_path, sbm):
    assert run("sparsify", sbm, "--fraction", 0.25, 0.5, 0.75, "--seed", 2, "--out-dir", tmp_path) == 0
    m = load_edge_list(sbm).m
    kept = []
    for pct, frac in ((25, 0.25), (50, 0.5), (75, 0.75)):
        path = tmp_path / f"sbm.ss-{pct}.d0.tsv"
        sp = load_edge_list(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        assert meta["strategy"] == "ss" and meta["fraction"] == frac and meta["edges"] == sp.m
        assert sp.m / m == pytest.approx(frac, rel=0.1)
        kept.append(sp.m)
    assert kept == sorted(kept) and len(set(kept)) == 3


def test_sparsify_uniform_skips_resistance(tmp_path, sbm, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("resistance computed for uniform sampling")

    monkeypatch.setattr(cli, "exact_resistance", boom)
    monkeypatch.setattr(cli, "approx_resistance", boom)
    assert run("sparsify", sbm, "--strategy", "uniform", "--fraction", 0.5, "--draws", 2, "--out-dir", tmp_path) == 0
    a = (tmp_path / "sbm.uniform-50.d0.tsv").read_bytes()
    b = (tmp_path / "sbm.uniform-50.d1.tsv").read_bytes()
    assert a != b


def _series(path):
    out = {}
    for line in path.read_text().splitlines()[1:]:
        t, mean, lo, hi, metric, label = line.split(",")
        out.setdefault(label, []).append((float(mean), float(lo), float(hi)))
    return {k: np.array(v) for k, v in out.items()}


def test_compare_self_within_baseline(tmp_path, capsys):
    from conftest import random_connected_graph

    g = random_connected_graph(np.random.default_rng(4), 60, extra=60)
    save_edge_list(g, tmp_path / "g.tsv")
    # a copy of the original, labelled as such by its file stem
    save_edge_list(g, tmp_path / "self.tsv")
    assert run("compare", tmp_path / "g.tsv", tmp_path / "self.tsv", "--gamma", 0.05, "--timesteps", 40,
               "--runs", 40, "--cpns-runs", 40, "--metrics", "fraction", "--out-dir", tmp_path) == 0
    s = _series(tmp_path / "compare_fraction.csv")
    base, same = s["baseline"], s["self"]
    within = (same[:, 0] >= base[:, 1]) & (same[:, 0] <= base[:, 2])
    assert within.mean() >= 0.7
    # hand-off to stdout: one row per label and metric
    assert "self\tfraction\t" in capsys.readouterr().out


def test_compare_empty_sparsifier_flat(tmp_path):
    save_edge_list(WeightedGraph.from_edges(10, [(i, i + 1, 1.0) for i in range(9)]), tmp_path / "p.tsv")
    save_edge_list(WeightedGraph.from_edges(10, []), tmp_path / "empty.tsv")
    assert run("compare", tmp_path / "p.tsv", tmp_path / "empty.tsv", "--timesteps", 15, "--runs", 5,
               "--cpns-runs", 3, "--gamma", 0.5, "--out-dir", tmp_path) == 0
    s = _series(tmp_path / "compare_fraction.csv")
    np.testing.assert_allclose(s["empty"][:, 0], 0.1)
    for metric in ("hamming", "mi"):
        assert (tmp_path / f"compare_{metric}.csv").exists()


def test_compare_rejects_mismatched_n(tmp_path):
    save_edge_list(WeightedGraph.from_edges(4, [(0, 1, 1.0)]), tmp_path / "a.tsv")
    save_edge_list(WeightedGraph.from_edges(5, [(0, 1, 1.0)]), tmp_path / "b.tsv")
    assert run("compare", tmp_path / "a.tsv", tmp_path / "b.tsv", "--runs", 2, "--out-dir", tmp_path) == 4


def test_importance_tree_degenerate(tmp_path, capsys):
    save_edge_list(WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 3.0), (1, 3, 1.0)]), tmp_path / "t.tsv")
    assert run("importance", tmp_path / "t.tsv", "--runs-per-source", 3, "--gamma", 0.2, "--out-dir", tmp_path) == 0
    assert capsys.readouterr().out.strip() == "r=degenerate"
    _, rows = read_tsv(tmp_path / "t.importance.tsv")
    assert all(float(r["eei"]) == 1.0 and float(r["leverage"]) == pytest.approx(1.0) for r in rows)
    assert json.loads((tmp_path / "t.importance.json").read_text())["pearson_r"] is None


def _snapshot(directory):
    return {p.relative_to(directory): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_every_command_replays_byte_identically(tmp_path):
    out = tmp_path / "out"
    assert run("generate", "--family", "complete-powerlaw", "--n", 25, "--seed", 5, "--out-dir", out,
               "--output", "k.tsv") == 0
    k = out / "k.tsv"
    assert run("resist", k, "--mode", "approx", "--seed", 2, "--out-dir", out) == 0
    assert run("sparsify", k, "--fraction", 0.5, "--draws", 2, "--out-dir", out) == 0
    assert run("compare", k, out / "k.ss-50.d0.tsv", out / "k.ss-50.d1.tsv", "--timesteps", 20, "--runs", 6,
               "--cpns-runs", 3, "--trajectories", "--out-dir", out) == 0
    assert run("importance", k, "--runs-per-source", 3, "--gamma", 0.01, "--out-dir", out) == 0
    order = ["generate", "resist", "sparsify", "compare", "importance"]
    manifests = [out / f"{c}.manifest.json" for c in order]
    assert sorted(p.name for p in out.glob("*.manifest.json")) == sorted(m.name for m in manifests)
    before = _snapshot(out)
    # wipe every output, then rebuild the pipeline from the manifests alone
    for m in manifests:
        for name in json.loads(m.read_text())["outputs"]:
            Path(name).unlink()
    for m in manifests:
        copy = tmp_path / m.name
        copy.write_bytes(m.read_bytes())
        assert run("replay", copy) == 0
    assert _snapshot(out) == before


def test_replay_rejects_foreign_manifest(tmp_path):
    (tmp_path / "m.json").write_text('{"tool": "other", "argv": []}')
    assert run("replay", tmp_path / "m.json") == 4
    (tmp_path / "bad.json").write_text("{not json")
    assert run("replay", tmp_path / "bad.json") == 3


def test_exit_codes(tmp_path, monkeypatch):
    (tmp_path / "bad.tsv").write_text("0\t1\tx\n")
    assert run("resist", tmp_path / "bad.tsv", "--out-dir", tmp_path) == 3
    save_edge_list(WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]), tmp_path / "ok.tsv")
    assert run("importance", tmp_path / "ok.tsv", "--gamma", 1.5, "--out-dir", tmp_path) == 4
    assert run("sparsify", tmp_path / "ok.tsv", "--fraction", 0.0, "--out-dir", tmp_path) == 4
    assert run("resist", tmp_path / "missing.tsv", "--out-dir", tmp_path) == 6
    (tmp_path / "afile").write_text("")
    assert run("resist", tmp_path / "ok.tsv", "--out-dir", tmp_path / "afile" / "sub") == 6

    def diverge(*a, **k):
        raise ConvergenceError("no progress", residual=1.0, iterations=5)

    monkeypatch.setattr(cli, "approx_resistance", diverge)
    assert run("resist", tmp_path / "ok.tsv", "--mode", "approx", "--out-dir", tmp_path) == 5
