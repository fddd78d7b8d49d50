import json
import subprocess
import sys

from megflood.cli import main


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "edge-meg-sweep" in out and "waypoint-sparse" in out
    assert main(["presets", "--json"]) == 0
    assert "cycle-paths" in json.loads(capsys.readouterr().out)


def test_needs_exactly_one_source(capsys, tmp_path):
    assert main(["bound", "--out", str(tmp_path)]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "x", "models": [{"name": "static"}], "n_values": [], "seeds": [1]}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "empty n sweep" in capsys.readouterr().err
    cfg.write_text("{not json")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_bound_command(tmp_path, capsys):
    assert main(["bound", "--preset", "cycle-paths", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("path_model=") == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all("flood_median" not in r for r in summary["records"])


def test_simulate_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "s", "models": [{"name": "static", "graph": "complete"}],
                               "n_values": [6], "seeds": [1], "estimator": {"enabled": False}}))
    assert main(["simulate", "--config", str(cfg), "--trials", "3", "--seed", "9",
                 "--out", str(tmp_path / "o")]) == 0
    assert "median flood=1" in capsys.readouterr().out
    rows = (tmp_path / "o" / "runs.csv").read_text().splitlines()
    assert len(rows) == 4 and rows[1].split(",")[2] == "9"


def test_verify_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "v", "models": [{"name": "edge_meg", "p": 0.4, "q": 0.6}],
                               "n_values": [16], "seeds": [1]}))
    assert main(["verify", "--config", str(cfg), "--samples", "200", "--out", str(tmp_path)]) == 0
    reps = json.loads((tmp_path / "verify.json").read_text())
    assert reps[0]["passed"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "megflood", "presets"], capture_output=True, text=True)
    assert res.returncode == 0 and "k-augmented-grid" in res.stdout
