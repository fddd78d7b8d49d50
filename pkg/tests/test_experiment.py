import csv
import json
import math

import pytest

from megflood.experiment import (
    BOUND_FORMULAS,
    PRESETS,
    RESULT_COLUMNS,
    ConfigError,
    ExperimentConfig,
    build_model,
    evaluate,
    model_id,
    preset_config,
    run,
    verify_point,
)


def tiny(**kw):
    doc = {"name": "tiny", "models": [{"name": "static", "graph": "path"}], "n_values": [5, 9],
           "seeds": [3], "trials": 4, "estimator": {"enabled": False}}
    doc.update(kw)
    return ExperimentConfig.from_dict(doc)


class TestExpressions:
    def test_arithmetic(self):
        assert evaluate("2/n", n=64) == pytest.approx(1 / 32)
        assert evaluate("sqrt(n) + ln(e)", n=16) == pytest.approx(5.0)
        assert evaluate("ceil(log2(n))", n=100) == 7
        assert evaluate(0.5) == 0.5

    @pytest.mark.parametrize("bad", ["__import__('os')", "n.real", "x + 1", "[1, 2]", "2 +"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            evaluate(bad, n=3)


class TestConfig:
    def test_empty_sweep(self):
        with pytest.raises(ConfigError):
            tiny(n_values=[])
        with pytest.raises(ConfigError):
            tiny(seeds=[])
        with pytest.raises(ConfigError):
            tiny(models=[])

    def test_unknown_keys_and_models(self):
        with pytest.raises(ConfigError):
            tiny(colour="blue")
        with pytest.raises(ConfigError):
            tiny(models=[{"name": "teleport"}])
        with pytest.raises(ConfigError):
            tiny(epoch=0)

    def test_single_model_shortcut(self):
        cfg = ExperimentConfig.from_dict({"name": "x", "model": {"name": "static"}, "n_values": [4],
                                          "seeds": [0]})
        assert cfg.models == [{"name": "static"}]

    def test_hash_is_stable(self, tmp_path):
        a = tiny()
        p = tmp_path / "c.json"
        p.write_text(json.dumps(a.to_dict()))
        assert ExperimentConfig.from_json(p).config_hash == a.config_hash
        assert tiny(trials=5).config_hash != a.config_hash

    def test_model_id_sorted(self):
        assert model_id({"name": "edge_meg", "q": 0.5, "p": "2/n"}) == 'edge_meg[p="2/n",q=0.5]'

    def test_presets_parse(self):
        for name in PRESETS:
            assert preset_config(name).name == name
        with pytest.raises(ConfigError):
            preset_config("nope")
        assert preset_config("cycle-paths", trials=7).trials == 7


class TestModels:
    def test_edge_meg_analytics(self):
        cfg = tiny()
        inst = build_model({"name": "edge_meg", "p": "2/n", "q": 0.5}, 64, cfg)
        a = (2 / 64) / (2 / 64 + 0.5)
        assert inst.analytics["alpha"] == pytest.approx(a)
        assert inst.analytics["beta"] == 1.0
        assert set(inst.bounds) == {"stationarity", "edge_meg", "comparator"}
        assert inst.bounds["comparator"].value == pytest.approx(math.log(64) / math.log(3))

    def test_cycle_paths_bounds(self):
        inst = build_model({"name": "random_path", "graph": {"name": "cycle", "m": 3}}, 32, tiny())
        an = inst.analytics
        assert an["p_nm"] == pytest.approx(1 / 3) and an["eta"] == 1.0
        assert an["beta"] == 17.0
        assert inst.bounds["path_model"].applicable
        assert inst.bounds["graph_walk"].applicable

    def test_nonsimple_family_blocks_path_bound(self):
        spec = {"name": "random_path", "graph": {"name": "cycle", "m": 3},
                "paths": [[0, 1, 2, 0], [0, 2, 1, 0], [0, 1, 0], [0, 2, 0]]}
        inst = build_model(spec, 8, tiny())
        assert not inst.bounds["path_model"].applicable
        assert inst.bounds["path_model"].value is None

    def test_waypoint_region_bound(self):
        spec = {"name": "waypoint", "L": 3, "r": 1, "v_min": 1, "m": 4}
        inst = build_model(spec, 10, tiny())
        assert inst.bounds["waypoint_region"].applicable
        assert inst.analytics["lattice"] == 4

    def test_node_meg_json(self):
        spec = {"name": "node_meg", "kernel": {"builtin": "rank_one", "weights": [0.9, 0.1]},
                "connection": {"matrix": [[1, 0], [0, 0]]}}
        inst = build_model(spec, 8, tiny())
        assert inst.analytics["p_nm"] == pytest.approx(0.81)


class TestRun:
    def test_static_golden(self, tmp_path):
        out = run(tiny(), tmp_path)
        assert out.exit_code == 0
        meds = [r["flood_median"] for r in out.records]
        # sources cycle 0..3, path eccentricities: n=5 -> 4,3,2,3; n=9 -> 8,7,6,5
        assert meds == [3.0, 6.0]
        with open(tmp_path / "results.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == list(RESULT_COLUMNS)
        with open(tmp_path / "runs.csv") as fh:
            runs = list(csv.DictReader(fh))
        assert [int(r["flood_time"]) for r in runs[:4]] == [4, 3, 2, 3]

    def test_summary_bounds_recompute(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "name": "b", "models": [{"name": "edge_meg", "p": 0.1, "q": 0.4},
                                    {"name": "random_path", "graph": {"name": "cycle", "m": 3}}],
            "n_values": [16], "seeds": [0], "trials": 3, "estimator": {"trials": 5}})
        run(cfg, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["schema_version"] == 1
        assert summary["config_hash"] == cfg.config_hash
        seen = 0
        for rec in summary["records"]:
            for name, b in rec["bounds"].items():
                if b["value"] is None:
                    continue
                assert BOUND_FORMULAS[b["formula"]](**b["inputs"]) == pytest.approx(b["value"])
                seen += 1
            inp = rec["bounds"]["stationarity"]["inputs"]
            by_hand = inp["c"] * inp["M"] * (1 / (inp["n"] * inp["alpha"]) + inp["beta"]) ** 2 * math.log(16) ** 2
            assert rec["bound_stationarity"] == pytest.approx(by_hand)
        assert seen >= 6

    def test_requested_bound_missing(self, tmp_path):
        out = run(tiny(bounds=["edge_meg"]), tmp_path)
        assert out.exit_code == 1
        assert "does not apply" in out.failures[0]

    def test_strict_stops_early(self):
        out = run(tiny(bounds=["edge_meg"]), None, strict=True)
        assert len(out.records) == 1

    def test_bad_model_recorded(self):
        cfg = tiny(models=[{"name": "random_walk", "graph": {"name": "grid", "m": 3}}])
        out = run(cfg, None)
        assert out.exit_code == 1
        assert "construction failed" in out.records[0]["status"]

    def test_bounds_only_stage(self):
        cfg = tiny(models=[{"name": "edge_meg", "p": 0.2, "q": 0.2}])
        out = run(cfg, None, stages=("bounds",))
        assert "flood_median" not in out.records[0]
        assert out.records[0]["bound_edge_meg"] > 0

    def test_deterministic_and_worker_invariant(self, tmp_path):
        cfg = tiny(models=[{"name": "edge_meg", "p": "2/n", "q": 0.5}], n_values=[16], trials=8,
                   estimator={"trials": 4})
        run(cfg, tmp_path / "a", workers=1)
        run(cfg, tmp_path / "b", workers=2)
        for f in ("runs.csv", "results.csv", "summary.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_verify_point(self):
        cfg = tiny()
        rep = verify_point(cfg, {"name": "edge_meg", "p": 0.4, "q": 0.6}, 16, 0, samples=300)
        suites = {c["suite"] for c in rep["checks"]}
        assert suites == {"degree", "expansion", "contact"}
        rep = verify_point(cfg, {"name": "random_path", "graph": {"name": "cycle", "m": 3}}, 16, 0, samples=200)
        assert any(c["suite"].startswith("pair_dependence/") for c in rep["checks"])
