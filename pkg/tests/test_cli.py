import json
from importlib.resources import files

import pytest

from fracsgs import cli, datasets, io

DATA = files("fracsgs") / "data"


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_simulate_twice_identical(tmp_path):
    for d in ("a", "b"):
        assert run("simulate", "-c", DATA / "example1.toml", "--seed", 42, "--out-dir", tmp_path / d) == 0
    assert (tmp_path / "a/network.json").read_bytes() == (tmp_path / "b/network.json").read_bytes()
    man = json.loads((tmp_path / "a/manifest.json").read_text())
    assert man["seed"] == 42 and man["command"] == "simulate"
    assert man["effective_config"]["angle_mean"] == 70.0
    assert any(e["path"].endswith("example1_traces.txt") for e in man["inputs"])
    assert all(len(e["sha256"]) == 64 for e in man["inputs"])
    assert {"network.json", "report.json", "network.svg"} <= set(man["outputs"])


def test_simulate_flags_override_config(tmp_path):
    assert run("simulate", "-c", DATA / "example1.toml", "--seed", 3, "--transform", "nscore",
               "--kriging", "ordinary", "--set", "growth.angle_std=8", "--out-dir", tmp_path) == 0
    cfg = json.loads((tmp_path / "manifest.json").read_text())["effective_config"]
    assert (cfg["transform"], cfg["kriging"], cfg["angle_std"], cfg["rng_seed"]) == ("nscore", "ordinary", 8.0, 3)


def test_replay_known_flag(tmp_path):
    assert run("simulate", "-c", DATA / "example1.toml", "--replay-known", "--set", "seeding.count=0",
               "--out-dir", tmp_path) == 0
    nf = io.load_network(tmp_path / "network.json")
    assert len(nf.traces) == 40


def test_analyze_example2(tmp_path, capsys):
    assert run("analyze", DATA / "example2_traces.txt", "--out-dir", tmp_path) == 0
    assert "mean segment length 2289.27" in capsys.readouterr().out
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert stats["segment_length"]["mean"] == pytest.approx(datasets.EXAMPLE2_MEAN_SEGMENT_LENGTH, abs=1e-6)
    for name in ("rose.svg", "angle_hist.csv", "folded_hist.csv", "variogram.csv", "variogram.svg"):
        assert (tmp_path / name).stat().st_size > 0


def test_seed_preview(tmp_path):
    assert run("seed-preview", "-c", DATA / "example1.toml", "--out-dir", tmp_path) == 0
    rows = (tmp_path / "seeds.csv").read_text().splitlines()
    assert rows[0] == "x,y,azimuth" and len(rows) == 41
    assert all(float(r.split(",")[0]) <= 150.0 for r in rows[1:])


def test_compare_self_and_hidden_region(tmp_path):
    p = DATA / "example3_traces.txt"
    assert run("compare", p, p, "--out-dir", tmp_path / "self") == 0
    out = json.loads((tmp_path / "self/comparison.json").read_text())
    assert out["max_deviation"] == 0
    assert run("simulate", "-c", DATA / "example3.toml", "--seed", 1, "--out-dir", tmp_path / "sim") == 0
    assert run("compare", p, tmp_path / "sim/network.json", "-c", DATA / "example3.toml", "--simulated-only",
               "--out-dir", tmp_path / "cmp") == 0
    out = json.loads((tmp_path / "cmp/comparison.json").read_text())
    assert len(out["matches"]) == 4 and out["max_deviation"] <= 30.0


def test_verify_small_grid(tmp_path):
    flow = tmp_path / "flow.toml"
    flow.write_text("[flow]\nnx = 30\nny = 25\ndx = 230.0\ndy = 228.0\nrate = 561.46\ndt = 20.0\nt_end = 8000.0\n")
    p = DATA / "example3_traces.txt"
    assert run("verify", "--network", p, "--network", p, "--flow-config", flow, "--out-dir", tmp_path / "v") == 0
    out = json.loads((tmp_path / "v/comparison.json").read_text())
    assert out["comparison"]["delta"] == 0 and out["a"]["flow_balance_residual"] < 1e-8
    assert (tmp_path / "v/breakthrough_a.csv").read_text().startswith("t,c\n")


@pytest.mark.parametrize("argv", [
    ["simulate"],
    ["bogus"],
    ["simulate", "-c", "missing.toml"],
    ["simulate", "-c", str(DATA / "example1.toml"), "--seed", "-1"],
    ["simulate", "-c", str(DATA / "example1.toml"), "--set", "growth.segment_length=-3"],
    ["analyze", str(DATA / "example1.toml")],
    ["verify", "--network", "a.json", "--flow-config", "f.toml"],
])
def test_invalid_input_exits_1(argv, tmp_path, capsys):
    assert cli.main(argv + ["--out-dir", str(tmp_path)]) == 1
    assert capsys.readouterr().err


def test_runtime_failure_exits_2(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(cli, "run_simulation", boom)
    assert run("simulate", "-c", DATA / "example1.toml", "--out-dir", tmp_path) == 2
