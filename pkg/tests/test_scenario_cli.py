import json
from pathlib import Path

import numpy as np
import pytest

from plap.apps import run_scenario
from plap.cli import main
from plap.report import dumps_json
from plap.scenario import ScenarioError, load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_scenario(tmp_path, name="tiny", **overrides):
    doc = {
        "name": name,
        "domain": {"kind": "interval", "length": 1.0, "cells": 128},
        "problem": {
            "form": "two-param",
            "p": 2.0, "q": 1.5, "a": 0.5, "b": 0.5,
            "lambda": 1.0, "beta": 1.0,
            "omega1": "1", "omega2": "1",
        },
        "solver": {"tol": 1e-11, "eigen_tol": 1e-12, "fp_tol": 1e-9, "fp_max_iter": 2000},
    }
    for key, val in overrides.items():
        section, _, field = key.partition(".")
        if field:
            doc[section][field] = val
        else:
            doc[section] = val
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return path


class TestScenarioParsing:
    def test_load_shipped_baseline(self):
        sc = load_scenario(SCENARIOS / "interval-baseline.json")
        assert sc.name == "interval-baseline"
        assert sc.domain.cells == (1024,)
        assert sc.problem.q == 1.5
        assert not sc.wants_continuation

    def test_continuation_flag(self):
        sc = load_scenario(SCENARIOS / "interval-homogeneous-beta0.json")
        assert sc.wants_continuation
        assert sc.q0 == 1.5 and sc.stages == 8

    def test_h_override_changes_cells(self, tmp_path):
        path = write_scenario(tmp_path)
        sc = load_scenario(path, h_override=1.0 / 64)
        assert sc.domain.cells == (64,)

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "name": "x",\n broken\n}')
        with pytest.raises(ScenarioError, match="line 3"):
            load_scenario(path)

    @pytest.mark.parametrize(
        "key,val,needle",
        [
            ("problem.p", 0.5, "problem"),
            ("problem.lambda", "one", "lambda"),
            ("problem.omega1", "x + z", "omega1"),
            ("problem.omega1", "x - 1", "negative"),
            ("domain.kind", "triangle", "kind"),
            ("solver.tol", -1.0, "tol"),
        ],
    )
    def test_field_diagnostics(self, tmp_path, key, val, needle):
        path = write_scenario(tmp_path, **{key: val})
        with pytest.raises(ScenarioError, match=needle):
            load_scenario(path)

    def test_missing_name(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{}")
        with pytest.raises(ScenarioError, match="name"):
            load_scenario(path)


class TestRunScenario:
    def test_baseline_exits_zero_with_artifacts(self, tmp_path):
        path = write_scenario(tmp_path)
        out = tmp_path / "out"
        assert run_scenario(path, out_dir=out) == 0
        report = json.loads((out / "tiny.report.json").read_text())
        assert report["exit_code"] == 0
        assert report["torsion"]["alpha"] == pytest.approx(8.0, rel=1e-6)
        assert (out / "tiny.solution.csv").exists()
        assert (out / "tiny.solution.png").exists()

    def test_threshold_violation_exits_two(self, tmp_path):
        path = write_scenario(tmp_path, **{"problem.beta": 8.0})
        out = tmp_path / "out"
        assert run_scenario(path, out_dir=out) == 2
        report = json.loads((out / "tiny.report.json").read_text())
        assert report["exit_code"] == 2
        assert not report["thresholds"]["admissible"]

    def test_malformed_config_exits_one(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope}")
        assert run_scenario(path, out_dir=tmp_path / "out") == 1

    def test_homogeneous_continuation_exits_zero_with_trace(self, tmp_path):
        doc = json.loads((SCENARIOS / "interval-homogeneous-beta0.json").read_text())
        doc["domain"]["cells"] = 128
        doc["schedule"]["stages"] = 5
        path = tmp_path / "homog.json"
        path.write_text(json.dumps(doc))
        out = tmp_path / "out"
        assert run_scenario(path, out_dir=out) == 0
        report = json.loads((out / "interval-homogeneous-beta0.report.json").read_text())
        assert len(report["continuation"]["stages"]) == 5
        assert (out / "interval-homogeneous-beta0.trace.csv").exists()
        assert (out / "interval-homogeneous-beta0.trace.png").exists()
        # homogeneity diagnostic references the extrapolated multiplier
        assert report["homogeneity"]["residual_2u"] == pytest.approx(
            2.0 * report["homogeneity"]["residual_u"], rel=1e-9
        )

    def test_figures_suppressed_on_request(self, tmp_path):
        path = write_scenario(tmp_path)
        out = tmp_path / "out"
        assert run_scenario(path, out_dir=out, figures=False) == 0
        assert not (out / "tiny.solution.png").exists()


class TestCli:
    def test_run_subcommand(self, tmp_path):
        path = write_scenario(tmp_path)
        assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 0

    def test_run_with_h_tol_seed_flags(self, tmp_path):
        path = write_scenario(tmp_path)
        code = main(["run", str(path), "--h", "0.0078125", "--tol", "1e-9",
                     "--seed", "7", "--out", str(tmp_path / "o")])
        assert code == 0

    def test_sweep_with_workers(self, tmp_path):
        write_scenario(tmp_path, name="w1")
        write_scenario(tmp_path, name="w2")
        out = tmp_path / "o"
        code = main(["sweep", str(tmp_path), "--workers", "2", "--out", str(out)])
        assert code == 0
        assert (out / "w1.report.json").exists() and (out / "w2.report.json").exists()

    def test_thresholds_subcommand(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["thresholds", str(path), "--out", str(tmp_path / "o")]) == 0
        text = capsys.readouterr().out
        assert "alpha" in text and "beta_max" in text
        assert (tmp_path / "o" / "tiny.thresholds.json").exists()

    def test_sweep_subcommand(self, tmp_path):
        write_scenario(tmp_path, name="a")
        write_scenario(tmp_path, name="b", **{"problem.beta": 8.0})
        out = tmp_path / "o"
        code = main(["sweep", str(tmp_path), "--out", str(out)])
        assert code == 2  # worst exit code propagates
        summary = json.loads((out / "sweep.summary.json").read_text())
        codes = {r["scenario"].split("/")[-1]: r["exit_code"] for r in summary["results"]}
        assert codes["a.json"] == 0 and codes["b.json"] == 2

    def test_malformed_exits_one(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[1,")
        assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 1


class TestJsonEmission:
    def test_floats_have_17_significant_digits(self):
        text = dumps_json({"x": 1.0 / 3.0, "arr": [0.1]})
        assert "0.33333333333333331" in text
        assert "0.10000000000000001" in text

    def test_round_trip_preserves_doubles(self):
        rng = np.random.default_rng(2)
        vals = rng.standard_normal(64).tolist()
        again = json.loads(dumps_json({"v": vals}))["v"]
        assert again == vals

    def test_report_files_parse_as_json(self, tmp_path):
        path = write_scenario(tmp_path)
        out = tmp_path / "out"
        run_scenario(path, out_dir=out)
        doc = json.loads((out / "tiny.report.json").read_text())
        assert doc["scenario"] == "tiny"
