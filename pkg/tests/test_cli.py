import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mixclust.cli import default_ladder, main, read_labels, sweep_eps0, write_labels
from mixclust.graph import SimilarityMatrix, load_edge_list, write_edge_list
from mixclust.matrices import TWO_BLOCK_W
from mixclust.rard import RardConfig
from mixclust.synth import SbmParams, generate_sbm

from conftest import cliques


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def sbm_files(tmp_path, capsys):
    edges = tmp_path / "g.edges"
    code, out, _ = run(capsys, "generate", "--dataset", "sbm", "--n", 100, "--k", 2, "--p", 0.9,
                       "--q", 0.05, "--seed", 7, "--out", edges)
    assert code == 0
    return edges, tmp_path / "g.labels"


# ---------------------------------------------------------------- generate

def test_generate_sbm_round_trip(sbm_files):
    edges, labels = sbm_files
    g = load_edge_list(str(edges))
    want, truth = generate_sbm(SbmParams(100, 2, 0.9, 0.05, 7))
    assert g == want
    np.testing.assert_array_equal(read_labels(labels), truth)


@pytest.mark.parametrize("dataset,n", [("gauss5", 2000), ("crescents", 384), ("ellipses", 2000),
                                       ("rings", 400)])
def test_generate_points(tmp_path, capsys, dataset, n):
    out = tmp_path / "pts.csv"
    code, stdout, _ = run(capsys, "generate", "--dataset", dataset, "--seed", 3, "--out", out)
    assert code == 0
    assert np.loadtxt(out, delimiter=",").shape == (n, 2)
    assert read_labels(tmp_path / "pts.labels").size == n
    row = table(stdout)[0]
    assert row["seed"] == "3" and row["n"] == str(n)


# ---------------------------------------------------------------- cluster / eval

def test_cluster_then_eval_plumbing(sbm_files, tmp_path, capsys):
    edges, labels = sbm_files
    pred, tree, trace = tmp_path / "pred.csv", tmp_path / "tree.json", tmp_path / "trace.csv"
    code, out, _ = run(capsys, "cluster", "--input", edges, "--eps0", 1e-3, "--seed", 1,
                       "--labels", labels, "--out", pred, "--tree", tree, "--trace", trace)
    assert code == 0
    row = table(out)[0]
    assert row["seed"] == "1" and row["n"] == "100"
    k = int(row["clusters"])
    assert len(set(read_labels(pred))) == k
    doc = json.loads(tree.read_text())
    assert doc["seed"] == 1 and doc["n"] == 100 and {"gap", "eps", "t"} <= set(doc)
    steps = table(trace.read_text())
    assert steps[0]["call"] == "root" and steps[0]["dy"] == ""
    assert sum(1 for s in steps) == int(row["total_iterations"])
    code, out, _ = run(capsys, "eval", "--pred", pred, "--truth", labels, "--graph", edges)
    assert code == 0
    ev = table(out)[0]
    assert set(ev) == {"nmi", "ncut", "recovered"}
    assert ev["recovered"] == row["recovered"]


def test_cluster_recovers_on_most_seeds(sbm_files, tmp_path, capsys):
    edges, labels = sbm_files
    ok = 0
    for seed in range(20):
        pred = tmp_path / f"p{seed}.csv"
        assert run(capsys, "cluster", "--input", edges, "--seed", seed, "--out", pred)[0] == 0
        code, out, _ = run(capsys, "eval", "--pred", pred, "--truth", labels)
        ok += table(out)[0]["recovered"] == "1"
    assert ok >= 14


@pytest.mark.xfail(strict=True, reason="seed 1 on this graph lands the two block means "
                   "within the b/2n threshold and returns a single cluster")
def test_cluster_example_seed_1_recovers(sbm_files, tmp_path, capsys):
    edges, labels = sbm_files
    pred = tmp_path / "pred.csv"
    run(capsys, "cluster", "--input", edges, "--eps0", 1e-3, "--seed", 1, "--out", pred)
    _, out, _ = run(capsys, "eval", "--pred", pred, "--truth", labels)
    assert table(out)[0]["recovered"] == "1"


def test_cluster_points_with_labels(tmp_path, capsys):
    pts = np.vstack([np.zeros((10, 2)), np.full((10, 2), 50.0)])
    pts += np.random.default_rng(0).normal(0, 0.1, pts.shape)
    path = tmp_path / "pts.csv"
    np.savetxt(path, np.column_stack([pts, np.repeat([0, 1], 10)]), delimiter=",")
    code, out, _ = run(capsys, "cluster", "--input", path, "--label-col", "last", "--graph", "pnn",
                       "--p", 3)
    assert code == 0
    assert table(out)[0]["recovered"] == "1"


def test_eval_identical(tmp_path, capsys):
    a = tmp_path / "a.labels"
    write_labels([0, 0, 1, 1], a)
    code, out, _ = run(capsys, "eval", "--pred", a, "--truth", a)
    assert code == 0 and table(out)[0] == {"nmi": "100.0000", "ncut": "", "recovered": "1"}


# ---------------------------------------------------------------- verify

def test_verify_builtin(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code, _, err = run(capsys, "verify", "--instances", 3, "--out", out)
    assert code == 0
    rows = table(out.read_text())
    assert {r["check"] for r in rows} == {"lemma1", "theorem1", "theorem2"}
    assert all(r["holds"] == "1" for r in rows)
    assert "lambda_k+1" in err


def test_verify_input_file(tmp_path, capsys):
    g = SimilarityMatrix.from_dense(TWO_BLOCK_W)
    edges, labels = tmp_path / "w.edges", tmp_path / "w.labels"
    write_edge_list(g, edges)
    write_labels([0, 0, 0, 1, 1, 1], labels)
    code, out, _ = run(capsys, "verify", "--check", "theorem2", "--input", edges, "--labels", labels,
                       "--t-max", 5)
    assert code == 0
    assert [r["t"] for r in table(out)] == [str(t) for t in range(6)]
    code, _, _ = run(capsys, "verify", "--check", "theorem1", "--input", edges)
    assert code == 1


def test_verify_guard_exit_code(tmp_path, capsys):
    w, lab = cliques([300, 300])
    edges, labels = tmp_path / "big.edges", tmp_path / "big.labels"
    write_edge_list(SimilarityMatrix.from_dense(w), edges)
    write_labels(lab, labels)
    code, _, err = run(capsys, "verify", "--check", "theorem1", "--input", edges, "--labels", labels)
    assert code == 3 and "oracle" in err.lower()


# ---------------------------------------------------------------- bench / sweep

def test_bench_recovery_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "bench", "recovery", "--n", 120, "--k", "2", "--q", "0,0.02",
                       "--reps", 2)
    assert code == 0
    rows = table(out)
    assert [(r["q"], r["seed"]) for r in rows] == [("0.0", "0"), ("0.0", "1"), ("0.02", "0"),
                                                   ("0.02", "1")]


def test_bench_scaling_csv(capsys):
    code, out, err = run(capsys, "bench", "scaling", "--n", "200,400", "--k", 2, "--reps", 1)
    assert code == 0 and len(table(out)) == 2 and "slope" in err
    assert run(capsys, "bench", "scaling", "--k", "2,3")[0] == 1


def test_sweep_ideal_three_blocks():
    w, _ = cliques([8, 8, 8])
    g = SimilarityMatrix.from_dense(w)
    res = sweep_eps0(g, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5], RardConfig(seed=0))
    assert [r.clusters for r in res.rows] == [3] * 5
    assert res.recommended == 1e-1 and res.rows[0].recommended


def test_sweep_single_clique_and_short_ladder():
    g = SimilarityMatrix.from_dense(cliques([10])[0])
    res = sweep_eps0(g, default_ladder(1e-2, 4))
    assert all(r.clusters == 1 for r in res.rows) and res.recommended == 1e-2
    assert sweep_eps0(g, [1e-3]).recommended is None
    with pytest.raises(ValueError):
        sweep_eps0(g, [1e-3, 1e-2])


def test_sweep_cli(tmp_path, capsys):
    w, _ = cliques([6, 6])
    edges = tmp_path / "c.edges"
    write_edge_list(SimilarityMatrix.from_dense(w), edges)
    code, out, err = run(capsys, "sweep", "--input", edges, "--ladder", "1e-2,1e-3", "--seed", 0)
    assert code == 0 and len(table(out)) == 2 and "recommended" in err


# ---------------------------------------------------------------- config and errors

def test_config_file_and_override(sbm_files, tmp_path, capsys):
    edges, _ = sbm_files
    conf = tmp_path / "run.conf"
    conf.write_text(f"input = {edges}\nseed = 5\neps0 = 0.01\n")
    code, out, _ = run(capsys, "cluster", "--config", conf)
    assert code == 0 and table(out)[0]["seed"] == "5"
    code, out, _ = run(capsys, "cluster", "--config", conf, "--seed", 6)
    assert table(out)[0]["seed"] == "6"


@pytest.mark.parametrize("text", ["bogus = 1\n", "seed = x\n", "no equals sign\n", "graph = knn\n"])
def test_config_rejects(tmp_path, capsys, text):
    conf = tmp_path / "bad.conf"
    conf.write_text(text)
    assert run(capsys, "cluster", "--input", "x.edges", "--config", conf)[0] == 1


def test_unknown_flag(capsys):
    code, _, err = run(capsys, "cluster", "--input", "g.edges", "--frobnicate")
    assert code == 1 and "unrecognized" in err


def test_no_command_and_version(capsys):
    assert run(capsys)[0] == 1
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.startswith("mixclust ") and "numpy" in out


def test_bad_data_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.edges"
    bad.write_text("0 1 1.0\n0 1 1.0\n")
    code, _, err = run(capsys, "cluster", "--input", bad)
    assert code == 2 and "duplicate" in err
    assert run(capsys, "cluster", "--input", tmp_path / "missing.edges")[0] == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "mixclust.cli", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.startswith("mixclust ")
