import csv
import json

import pytest

from kernhalf.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "d.csv"
    assert run("gen", "--dim", 3, "--m", 120, "--L", 3, "--seed", 5, "--out", path) == 0
    return path


def test_gen_writes_csv_and_sidecar(dataset):
    rows = dataset.read_text().splitlines()
    assert rows[0] == "x1,x2,x3,y" and len(rows) == 121
    meta = json.loads((dataset.parent / "d.csv.meta.json").read_text())
    assert meta["generator"]["seed"] == 5 and len(meta["generator"]["w_star"]) == 3


def test_train_then_eval(tmp_path, dataset, capsys):
    model = tmp_path / "m.json"
    assert run("train", "--data", dataset, "--B", 10, "--iters", 2000, "--out", model) == 0
    out = capsys.readouterr().out
    objective = float(out.split("final objective ")[1].split()[0])
    report = tmp_path / "r.json"
    assert run("eval", "--model", model, "--data", dataset, "--mu", "0.05,0.1", "--json", report) == 0
    doc = json.loads(report.read_text())
    assert doc["raw_abs_error"] == pytest.approx(objective, abs=1e-12)
    assert doc["abs_error"] <= doc["raw_abs_error"]
    assert set(doc["margin_errors"]) == {"0.05", "0.1"}


def test_log_budget_too_large(tmp_path, dataset, capsys):
    code = run("train", "--data", dataset, "--log-B", 1000, "--out", tmp_path / "m.json")
    assert code == 2
    assert "sweep" in capsys.readouterr().err


def test_eval_dimension_mismatch(tmp_path, dataset):
    model = tmp_path / "m.json"
    run("train", "--data", dataset, "--B", 1, "--iters", 100, "--out", model)
    other = tmp_path / "o.csv"
    run("gen", "--dim", 2, "--m", 10, "--out", other)
    assert run("eval", "--model", model, "--data", other) == 1


def test_usage_errors(tmp_path):
    assert run("train", "--B", 1) == 2
    assert run("gen", "--dim", 0, "--m", 3, "--out", tmp_path / "x.csv") == 2
    assert run("frobnicate") == 2


def test_malformed_csv_is_runtime_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,y\n0.1,1\n0.2,7\n")
    assert run("train", "--data", bad, "--B", 1, "--out", tmp_path / "m.json") == 1
    assert "bad.csv:3:" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("# comment\ndim = 2\nm = 7\nseed = 3\n")
    out = tmp_path / "c.csv"
    assert run("gen", "--config", cfg, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 8
    cfg.write_text("dim = 2\nbogus = 1\n")
    assert run("gen", "--config", cfg, "--m", 3, "--out", out) == 2


def test_approx(tmp_path):
    out = tmp_path / "a.json"
    assert run("approx", "--L", 3, "--eps", 0.05, "--kind", "both", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["sigmoid"]["sup_error"] <= 0.05
    assert doc["sigmoid"]["within_bound"] is True
    assert doc["erf"]["degree"] == 61


def test_bounds(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert run("bounds", "--L", 3, "--eps", 0.1, "--delta", 0.05, "--B", 1, "--mu", 0.1,
               "--json", out) == 0
    doc = json.loads(out.read_text())
    assert doc["sample_size_hphi(L, eps, delta)"]["value"] == 24205
    assert doc["sample_size_hb(B=1.0, erm)"]["value"] == 99239
    assert doc["sample_size_hb(B_sig, mainres)"]["overflow"] is True
    assert "saturated" in capsys.readouterr().out


def test_sweep_rows_and_selection(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--dim", 3, "--m", 150, "--grid", "1,10,100", "--seeds", 3,
               "--iters", 300, "--out", out) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9
    for seed in "012":
        assert sum(r["selected"] == "True" for r in rows if r["seed"] == seed) == 1
