import json

import numpy as np
import pytest
from sklearn.base import clone

from rfvlc import experiment
from rfvlc.analytic.vlc import NumericalError
from rfvlc.cli import EXIT_NUMERIC, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, main
from rfvlc.config import NetworkConfig, load_config
from rfvlc.estimators import CoverageModel, CoverageSimulator
from rfvlc.experiment import (COLUMNS, ExperimentSpec, ResultRow, emit_results, parse_sweep, read_results,
                              run_experiment)


class TestEstimators:
    def test_params_and_clone(self):
        m = CoverageModel(mode="rf_only", tail_tol=1e-4)
        assert m.get_params() == {"mode": "rf_only", "metric": "coverage", "tail_tol": 1e-4, "r_nodes": 64}
        c = clone(m)
        assert c.get_params() == m.get_params() and c is not m
        s = CoverageSimulator(trials=500).set_params(seed=3)
        assert clone(s).seed == 3

    def test_predict_shapes(self):
        cfgs = [NetworkConfig(xi_fov_deg=x) for x in (45.0, 70.0)]
        assert CoverageModel(metric="association").predict(cfgs).shape == (2,)
        assert CoverageModel(metric="association").predict(cfgs[0]).shape == (1,)
        sim = CoverageSimulator(trials=2000, seed=1)
        assert sim.predict(cfgs).shape == (2,)
        iv = sim.predict_interval(cfgs)
        assert iv.shape == (2, 2) and np.all(iv[:, 1] >= 0) and iv[0, 1] > 0

    def test_engines_agree(self):
        cfg = NetworkConfig(k_interpretation="loss", empty_tier="resample")
        a = CoverageModel(mode="rf_only").predict([cfg])[0]
        m = CoverageSimulator(mode="rf_only", trials=40_000, seed=2).predict([cfg])[0]
        assert a == pytest.approx(m, abs=0.01)

    def test_simulator_is_seed_deterministic(self):
        cfg = [NetworkConfig()]
        a = CoverageSimulator(trials=3000, seed=5).predict(cfg)
        b = CoverageSimulator(trials=3000, seed=5, n_jobs=2).predict(cfg)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("kwargs", [{"mode": "lifi"}, {"metric": "outage"},
                                        {"mode": "hybrid", "metric": "rate"}])
    def test_fit_validates(self, kwargs):
        with pytest.raises(ValueError):
            CoverageModel(**kwargs).fit()
        with pytest.raises(ValueError):
            CoverageSimulator(**kwargs).fit()

    def test_simulator_trials_and_seed(self):
        with pytest.raises(ValueError):
            CoverageSimulator(trials=0).fit()
        with pytest.raises(ValueError):
            CoverageSimulator(seed=-1).fit()

    def test_rejects_non_config_input(self):
        with pytest.raises(TypeError):
            CoverageModel().predict([1.0])
        with pytest.raises(TypeError):
            CoverageModel().predict(3)


class TestSweepAndEmission:
    def test_parse_sweep(self):
        name, vals = parse_sweep("xi_fov_deg=30:90:10")
        assert name == "xi_fov_deg"
        np.testing.assert_allclose(vals, np.arange(30, 91, 10))
        assert parse_sweep("h_m=1:2.5:1")[1] == pytest.approx((1.0, 2.0))

    @pytest.mark.parametrize("text", ["xi_fov_deg", "xi_fov_deg=1:2", "xi_fov_deg=3:1:1",
                                      "xi_fov_deg=1:2:0", "xi_fov_deg=a:b:c"])
    def test_parse_sweep_errors(self, text):
        with pytest.raises(ValueError):
            parse_sweep(text)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ExperimentSpec(sweep_param="k_interpretation", sweep_values=(1.0,))
        with pytest.raises(ValueError):
            ExperimentSpec(sweep_param="h_m", sweep_values=(2.0, 1.0))
        with pytest.raises(ValueError):
            ExperimentSpec(mode="hybrid", metric="rate")

    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_round_trip(self, fmt, tmp_path):
        spec = ExperimentSpec(metric="association", sweep_param="h_m", sweep_values=(1.5, 2.5),
                              trials=500, engines="both")
        rows = run_experiment(spec, NetworkConfig(z1_override=0.05))
        path = tmp_path / f"out.{fmt}"
        emit_results(rows, fmt, path)
        back = read_results(path, fmt)
        assert len(back) == len(rows) == 4
        for a, b in zip(rows, back):
            assert (a.engine, a.metric, a.sweep_value) == (b.engine, b.metric, b.sweep_value)
            assert b.value == pytest.approx(a.value, rel=1e-8)

    def test_empty_outputs(self):
        assert emit_results([], "csv") == ",".join(COLUMNS) + "\n"
        assert emit_results([], "jsonl") == ""
        assert read_results(emit_results([], "csv"), "csv") == []

    def test_timing_column_blanked(self):
        row = ResultRow("", None, "analytic", "coverage", 0.5, None, 1.234)
        assert "1.234" in emit_results([row], "csv")
        assert "1.234" not in emit_results([row], "csv", timing=False)

    def test_vector_metric_rows(self):
        spec = ExperimentSpec(metric="interferer_pmf", engines="analytic")
        rows = run_experiment(spec, NetworkConfig())
        assert all(r.metric.startswith("interferer_pmf@k=") for r in rows)
        assert sum(r.value for r in rows) == pytest.approx(1.0, abs=1e-6)


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_simulate_csv(self, capsys):
        code, out, _ = _run(["simulate", "--trials", "2000", "--no-timing"], capsys)
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == ",".join(COLUMNS) and len(lines) == 2

    def test_byte_identical_reruns(self, tmp_path, capsys):
        outs = []
        for i, jobs in enumerate((1, 2)):
            p = tmp_path / f"r{i}.jsonl"
            argv = ["sweep", "--engine", "mc", "--sweep", "xi_fov_deg=40:70:15", "--trials", "1500",
                    "--seed", "9", "--format", "jsonl", "--no-timing", "--jobs", str(jobs), "--out", str(p)]
            assert main(argv) == EXIT_OK
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]
        assert [json.loads(x)["sweep_value"] for x in outs[0].decode().splitlines()] == [40.0, 55.0, 70.0]

    def test_compare_tolerance_breach(self, capsys):
        argv = ["compare", "--metric", "association", "--trials", "500", "--tolerance", "1e-12"]
        code, _, err = _run(argv, capsys)
        assert code == EXIT_TOLERANCE and "tolerance breach" in err

    def test_compare_within_tolerance(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("z1_override = 0.05\nempty_tier = resample\n")
        argv = ["compare", "--config", str(cfg), "--metric", "association", "--trials", "20000",
                "--tolerance", "0.02"]
        assert _run(argv, capsys)[0] == EXIT_OK

    def test_numeric_failure_exit(self, monkeypatch, capsys):
        def boom(*_a, **_k):
            raise NumericalError("forced")
        monkeypatch.setattr(experiment.analytic, "coverage", boom)
        code, out, err = _run(["analyze"], capsys)
        assert code == EXIT_NUMERIC and "forced" in err and "numeric: forced" in out

    @pytest.mark.parametrize("argv", [["simulate", "--sweep", "alpha"],
                                      ["simulate", "--sweep", "k_interpretation=1:2:1"],
                                      ["simulate", "--config", "/nonexistent/file.cfg"],
                                      ["analyze", "--mode", "hybrid", "--metric", "rate"]])
    def test_usage_errors(self, argv, capsys):
        assert _run(argv, capsys)[0] == EXIT_USAGE

    def test_bad_config_value(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("h_m = -3\n")
        code, _, err = _run(["config", "--config", str(cfg)], capsys)
        assert code == EXIT_USAGE and "h_m" in err

    def test_argparse_errors_use_usage_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--mode", "lifi"])
        assert exc.value.code == EXIT_USAGE

    def test_config_round_trip(self, tmp_path, capsys):
        code, out, _ = _run(["config"], capsys)
        assert code == EXIT_OK and "# derived" in out
        p = tmp_path / "dump.cfg"
        p.write_text(out)
        assert load_config(str(p)) == NetworkConfig()

    def test_design(self, tmp_path, capsys):
        cfg = tmp_path / "wide.cfg"
        cfg.write_text("xi_fov_deg = 90\nz1_override = 0.05\n")
        code, out, _ = _run(["design", "--config", str(cfg), "--beta", "0.5", "--format", "jsonl"], capsys)
        assert code == EXIT_OK
        recs = [json.loads(x) for x in out.splitlines()]
        assert [r["method"] for r in recs] == ["closed", "asymptotic", "numeric"]
        assert recs[0]["feasible"] and recs[0]["achieved_beta_model"] == pytest.approx(0.5, abs=1e-9)
        assert recs[2]["achieved_beta_exact"] == pytest.approx(0.5, abs=1e-8)

    def test_design_closed_needs_wide_fov(self, capsys):
        code, out, _ = _run(["design", "--beta", "0.5", "--method", "closed"], capsys)
        assert code == EXIT_OK
        assert "false" in out and "xi_fov_deg = 90" in out

    def test_selftest_quick(self, capsys):
        code, out, _ = _run(["selftest", "--quick"], capsys)
        assert code == EXIT_OK
        assert out.count("PASS") >= 4 and "FAIL" not in out
