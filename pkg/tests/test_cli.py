"""Command line interface: exit codes, formats, determinism."""

import json
import math

import numpy as np
import pytest

from sparseph import jsonio
from sparseph.cli import main

EQ_CSV = "0,0\n1,0\n0.5,{:.17g}\n".format(math.sqrt(3.0) / 2.0)


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_diagram_stdout_equilateral(tmp_path, capsys):
    points = tmp_path / "eq.csv"
    points.write_text(EQ_CSV)
    rc, out, _ = run(capsys, "diagram", "--points", str(points), "--k", "1",
                     "--cutoff", "2.0")
    assert rc == 0
    assert out.splitlines() == ["1,1.1547005383792515"]


def test_diagram_censored_inf_literal(tmp_path, capsys):
    points = tmp_path / "eq.csv"
    points.write_text(EQ_CSV)
    rc, out, _ = run(capsys, "diagram", "--points", str(points), "--k", "1",
                     "--cutoff", "1.05")
    assert rc == 0
    assert out.splitlines() == ["1,inf"]


def test_simulate_diagram_round_trip(tmp_path, capsys):
    out = tmp_path / "run.csv"
    rc, stdout, _ = run(capsys, "simulate", "--n", "300", "--d", "2", "--k", "1",
                        "--radius", "1,0.6", "--seed", "5", "--out", str(out))
    assert rc == 0
    assert "wrote" in stdout
    meta = json.loads((tmp_path / "run.meta.json").read_text())
    assert meta["regime"]["regime"] == "divergence"
    assert meta["n_points"] == 300
    assert meta["meta"]["package"] == "sparseph"

    replay = tmp_path / "replay.csv"
    rc, _, _ = run(capsys, "diagram", "--points", str(tmp_path / "run.cloud.csv"),
                   "--k", "1", "--scale", repr(meta["r_n"]),
                   "--cutoff", "1.5", "--out", str(replay))
    assert rc == 0
    assert replay.read_bytes() == out.read_bytes()


def test_simulate_rejects_dense_radius(tmp_path, capsys):
    rc, _, err = run(capsys, "simulate", "--n", "100", "--d", "2", "--k", "1",
                     "--radius", "1,0.3", "--out", str(tmp_path / "x.csv"))
    assert rc == 2
    assert "sparse" in err


def test_diagram_names_bad_line(tmp_path, capsys):
    points = tmp_path / "bad.csv"
    points.write_text("0,0\n1,0\n0.5\n")
    rc, _, err = run(capsys, "diagram", "--points", str(points), "--k", "1",
                     "--cutoff", "2.0")
    assert rc == 1
    assert "line 3" in err


def test_diagram_invalid_scale(tmp_path, capsys):
    points = tmp_path / "eq.csv"
    points.write_text(EQ_CSV)
    rc, _, err = run(capsys, "diagram", "--points", str(points), "--k", "1",
                     "--cutoff", "2.0", "--scale", "-1")
    assert rc == 2
    assert "scale" in err


def test_missing_required_argument(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["diagram", "--cutoff", "2.0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_classify_json(capsys):
    rc, out, _ = run(capsys, "classify", "--radius", "1,0.75", "--k", "1",
                     "--d", "2")
    assert rc == 0
    data = json.loads(out)
    assert data["regime"] == "poisson"
    assert data["poisson_rate"] == 1.0

    rc, _, err = run(capsys, "classify", "--radius", "1,0.4", "--k", "1",
                     "--d", "2")
    assert rc == 2
    assert "sparse" in err


def test_limits_constant_exact(capsys):
    rc, out, _ = run(capsys, "limits", "--quantity", "constant", "--k", "1",
                     "--d", "2", "--density", "cube:1")
    assert rc == 0
    data = json.loads(out)
    assert data["quantity"] == "constant"
    assert data["value"] == 1.0 / 6.0
    assert data["std_error"] == 0.0


def test_limits_mass_threads_invariant(capsys):
    args = ("limits", "--quantity", "mass", "--k", "1", "--d", "2",
            "--rect", "0,1,1.05,1.15", "--left-closed",
            "--samples", "50000", "--seed", "3")
    rc1, out1, _ = run(capsys, *args, "--threads", "1")
    rc4, out4, _ = run(capsys, *args, "--threads", "4")
    assert rc1 == rc4 == 0
    assert out1 == out4
    data = json.loads(out1)
    assert data["n_samples"] == 50000
    assert data["seed"] == 3
    assert data["method"] == "interval"
    assert data["value"] > 0


def test_limits_missing_rect(capsys):
    rc, _, err = run(capsys, "limits", "--quantity", "mass", "--k", "1",
                     "--d", "2")
    assert rc == 2
    assert "rect" in err


MINI_CONFIG = {
    "mode": "poisson", "k": 1, "d": 2,
    "density": {"kind": "uniform-cube", "d": 2, "side": 1.0},
    "radius": {"a": 1.0, "gamma": 0.75, "beta": 0.0},
    "rectangles": [{"birth_lo": 0.0, "birth_hi": 1.0, "death_lo": 1.0,
                    "death_hi": 1.2, "left_closed": True}],
    "n": 1000, "n_trials": 200, "master_seed": 1, "mc_samples": 50000,
    "allow_rerun": False,
}


def test_verify_pass(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps(MINI_CONFIG))
    out_dir = tmp_path / "out"
    rc, out, _ = run(capsys, "verify", "--config", str(config), "--out",
                     str(out_dir), "--threads", "2")
    assert rc == 0
    assert "PASS" in out and "FAIL" not in out
    summary = jsonio.load(out_dir / "summary.json")
    assert summary["summary"]["mode"] == "poisson"
    assert all(v["pass"] for v in summary["summary"]["verdicts"])
    assert (out_dir / "results.jsonl").exists()


def test_verify_statistical_failure(tmp_path, capsys):
    failing = dict(MINI_CONFIG, mode="vanishing", n=30, n_trials=40,
                   mc_samples=10000)
    failing["radius"] = {"a": 1.0, "gamma": 0.85, "beta": 0.0}
    failing["rectangles"] = [{"birth_lo": 0.0, "birth_hi": 1.0,
                              "death_lo": 1.0, "death_hi": 1.2,
                              "left_closed": True}]
    config = tmp_path / "config.json"
    config.write_text(json.dumps(failing))
    rc, out, err = run(capsys, "verify", "--config", str(config), "--out",
                       str(tmp_path / "out"))
    assert rc == 3
    assert "FAIL" in out
    assert "statistical" in err


def test_verify_semantic_error(tmp_path, capsys):
    bad = dict(MINI_CONFIG, mode="vanishing")
    bad["radius"] = {"a": 1.0, "gamma": 0.85, "beta": 0.0}
    bad["rectangles"] = [{"birth_lo": 0.0, "birth_hi": 1.0, "death_lo": 1.0,
                          "death_hi": "inf", "left_closed": True}]
    config = tmp_path / "config.json"
    config.write_text(json.dumps(bad))
    rc, _, err = run(capsys, "verify", "--config", str(config), "--out",
                     str(tmp_path / "out"))
    assert rc == 2
    assert "finite" in err


def test_verify_malformed_config(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("{not json")
    rc, _, err = run(capsys, "verify", "--config", str(config), "--out",
                     str(tmp_path / "out"))
    assert rc == 1
    assert "error" in err


def test_verify_plots(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    config = tmp_path / "config.json"
    config.write_text(json.dumps(MINI_CONFIG))
    out_dir = tmp_path / "out"
    rc, _, _ = run(capsys, "verify", "--config", str(config), "--out",
                   str(out_dir), "--plots", "--threads", "2")
    assert rc == 0
    assert (out_dir / "summary.svg").exists()


def test_goldens_check(capsys):
    rc, out, _ = run(capsys, "goldens", "--check")
    assert rc == 0
    assert "ok" in out.lower()
