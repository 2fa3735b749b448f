import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathwise_hj.harness import cli
from pathwise_hj.harness.config import ConfigError, load_config, parse_seeds, resolve_config
from pathwise_hj.harness.montecarlo import monte_carlo
from pathwise_hj.harness.plots import emit_plots
from pathwise_hj.harness.registry import REGISTRY, experiment_keys
from pathwise_hj.harness.report import ExperimentReport, Series, Verdict, to_jsonable

SMALL = {"experiment": "qualitative_1d", "grid": {"n": 64}, "path": {"T": 0.25, "seeds": "0..2"}}


class TestConfig:
    def test_seed_specs(self):
        assert parse_seeds("2..4") == (2, 3, 4)
        assert parse_seeds(7) == (7,)
        assert parse_seeds([3, 1, 3]) == (1, 3)
        for bad in ("a..b", [], -1, True, "x"):
            with pytest.raises(ConfigError):
                parse_seeds(bad)

    @given(st.lists(st.integers(0, 1000), min_size=1))
    def test_seed_list_sorted_unique(self, seeds):
        assert parse_seeds(seeds) == tuple(sorted(set(seeds)))

    @pytest.mark.parametrize("raw", [
        {"experiment": "nope"},
        {"experiment": "q_decay", "colour": 1},
        {"experiment": "q_decay", "grid": {"n": 100}},
        {"experiment": "q_decay", "grid": {"n": 128, "size": 3}},
        {"experiment": "q_decay", "hamiltonian": {"key": "cubic"}},
        {"experiment": "q_decay", "path": {"dt": 0}},
        {"experiment": "q_decay", "tolerances": {"made_up": 1.0}},
        {"experiment": "q_decay", "initial_condition": {"preset": "square"}},
        ["not", "an", "object"],
    ])
    def test_rejects(self, raw):
        with pytest.raises(ConfigError):
            resolve_config(raw)

    def test_defaults_merge(self):
        cfg = resolve_config({"experiment": "q_decay", "hamiltonian": {"q": 3.0}})
        assert cfg.hamiltonian == {"key": "power", "q": 3.0}
        assert cfg.n == 256
        other = resolve_config({"experiment": "osc_bound", "hamiltonian": {"key": "graph_mcf"}})
        assert other.hamiltonian == {"key": "graph_mcf"}
        with pytest.raises(ConfigError, match="power"):
            resolve_config({"experiment": "q_decay", "hamiltonian": {"key": "quadratic"}})

    def test_json_round_trip(self, tmp_path):
        cfg = resolve_config(SMALL)
        p = tmp_path / "cfg.json"
        p.write_text(cfg.to_json())
        assert load_config(p) == cfg
        assert load_config("qualitative_1d").experiment == "qualitative_1d"
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_overrides(self):
        cfg = resolve_config(SMALL).with_overrides(seeds="5..6", n=32, params={})
        assert cfg.seeds == (5, 6) and cfg.n == 32


class TestRegistry:
    @pytest.mark.parametrize("key", experiment_keys())
    def test_defaults_resolve_and_declare_criteria(self, key):
        cfg = load_config(key)
        crit = REGISTRY[key].criteria_for(cfg)
        assert crit and len(set(crit)) == len(crit)
        assert REGISTRY[key].target

    def test_keys(self):
        assert {"q_decay", "lln_check", "ergodic_demo", "qualitative_2d", "smcf_decay"} <= set(experiment_keys())


class TestMonteCarlo:
    def test_report_and_files(self, out_dir):
        rep = monte_carlo(SMALL, out_dir=out_dir)
        assert [v.criterion for v in rep.verdicts] == list(REGISTRY["qualitative_1d"].criteria_for(
            resolve_config(SMALL)))
        assert rep.passed and not rep.partial
        data = json.loads((out_dir / "report.json").read_text())
        assert data["seeds"] == [0, 1, 2] and data["passed"] is True
        assert (out_dir / "timing.json").exists()
        assert list(out_dir.glob("*.svg")) and list(out_dir.glob("*.csv"))

    def test_deterministic_and_order_free(self, tmp_path):
        a = monte_carlo(SMALL, out_dir=tmp_path / "a")
        b = monte_carlo(SMALL, seeds=[2, 0, 1], workers=2, out_dir=tmp_path / "b")
        assert a.to_json() == b.to_json()
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
        svgs = sorted(p.name for p in (tmp_path / "a").glob("*.svg"))
        for name in svgs:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_single_seed_marks_spread_criterion(self):
        rep = monte_carlo(SMALL, seeds=[0])
        assert len(rep.per_seed) == 1
        assert rep.verdict("entropy_monotone").passed
        spread = rep.verdict("mean_martingale")
        assert not spread.passed and "two seeds" in spread.note

    def test_seed_failure_gives_partial_report(self, monkeypatch):
        exp = REGISTRY["qualitative_1d"]

        def flaky(cfg, seed):
            if seed == 1:
                raise FloatingPointError("boom")
            return exp.run_seed(cfg, seed)

        monkeypatch.setitem(REGISTRY, "qualitative_1d", dataclasses.replace(exp, run_seed=flaky))
        rep = monte_carlo(SMALL)
        assert rep.partial
        assert rep.failures[0]["seed"] == 1 and "boom" in rep.failures[0]["error"]
        assert [r["seed"] for r in rep.per_seed] == [0, 2]

    def test_all_seeds_failing_reports_missing(self, monkeypatch):
        exp = REGISTRY["qualitative_1d"]

        def broken(cfg, seed):
            raise RuntimeError("no")

        monkeypatch.setitem(REGISTRY, "qualitative_1d", dataclasses.replace(exp, run_seed=broken))
        rep = monte_carlo(SMALL)
        assert not rep.passed
        assert all(v.measured == "missing" for v in rep.verdicts)


class TestReport:
    def test_jsonable(self):
        out = to_jsonable({"a": np.float64(np.nan), "b": np.arange(2), "c": (np.inf, -np.inf), 1: np.bool_(1)})
        assert out == {"a": "nan", "b": [0, 1], "c": ["inf", "-inf"], "1": True}

    def test_verdict_line(self):
        line = Verdict("slope", False, -1.8, -0.5, 0.1, note="n=3").line()
        assert line == "FAIL slope: measured=-1.8 expected=-0.5 tol=0.1 (n=3)"

    def test_empty_series_warns(self, tmp_path):
        rep = ExperimentReport("x", {}, [0], [], {}, [], [Verdict("c", True, 0, 0, 0)],
                               series=[Series("empty", np.array([]), {})])
        with pytest.warns(RuntimeWarning):
            assert emit_plots(rep, tmp_path) == []

    def test_passed_needs_verdicts(self):
        assert not ExperimentReport("x", {}, [], [], {}, [], []).passed


class TestCli:
    def test_list(self, capsys):
        assert cli.main(["list-experiments"]) == 0
        out = capsys.readouterr().out
        assert all(k in out for k in experiment_keys())

    def test_run_config_file(self, tmp_path, capsys):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(SMALL))
        assert cli.main(["run", str(p), "--out", str(tmp_path / "o"), "--no-plots"]) == 0
        assert "PASS entropy_monotone" in capsys.readouterr().out
        assert (tmp_path / "o" / "report.json").exists()
        assert not list((tmp_path / "o").glob("*.svg"))

    def test_mc_env_default_out(self, tmp_path, monkeypatch):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(SMALL))
        monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "env"))
        assert cli.main(["mc", str(p), "--seeds", "0,1", "--quiet"]) == 0
        rep = json.loads((tmp_path / "env" / "qualitative_1d" / "report.json").read_text())
        assert rep["seeds"] == [0, 1]

    def test_config_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"experiment": "q_decay", "grid": {"n": 100}}))
        assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
        assert "power of two" in capsys.readouterr().err

    def test_failing_verdict_exit_code(self, tmp_path):
        cfg = dict(SMALL, tolerances={"mean_sigmas": 0.0})
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        assert cli.main(["run", str(p), "--out", str(tmp_path / "o"), "--quiet", "--no-plots"]) == 1

    def test_paths_stats(self, tmp_path):
        out = tmp_path / "ps"
        assert cli.main(["paths-stats", "--samples", "400", "--dt", "0.0625", "--out", str(out), "--quiet"]) == 0
        stats = json.loads((out / "paths_stats.json").read_text())
        assert abs(stats["variance"] - 1.0) < 0.2
        assert (out / "sample_path.svg").exists()
