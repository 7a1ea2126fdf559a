import json
import os

import numpy as np
import pandas as pd
import pytest

from config import Config
from models.experiment import ExperimentConfig
from models.series import SeriesRole
from modules.mavar import mavar_curve
from modules.series_io import make_series
from services.experiment_service import ExperimentService
from services.report_service import ReportService, safe_name


@pytest.fixture
def reports(out_dir):
    return ReportService(out_dir)


def test_default_output_dir_from_config(tmp_path, monkeypatch):
    target = str(tmp_path / "from_env")
    monkeypatch.setattr(Config, "OUTPUT_DIR", target)
    service = ReportService()
    assert service.output_dir == target
    assert os.path.isdir(target)


def test_curve_round_trip_is_exact(reports, rng):
    curve = mavar_curve(make_series(rng.standard_normal(3000).cumsum(), 0.008, role="cumulative"))
    path = reports.write_curve(curve, "curve.csv")
    loaded = ReportService.read_curve(path, role_used=SeriesRole.CUMULATIVE)

    with open(path, encoding="utf-8") as fh:
        assert fh.readline().strip() == "n,tau,mavar,m,conf"
    assert np.array_equal(loaded.values, curve.values)
    assert np.array_equal(loaded.taus, curve.taus)
    assert np.array_equal(loaded.n_values, curve.n_values)
    assert loaded.n_samples == 3000
    assert loaded.tau0 == 0.008


def test_json_is_pretty_utf8(reports):
    path = reports.write_json({"label": "trace µs", "H": 0.8}, "estimate.json")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()

    assert "trace µs" in text
    assert '\n  "H": 0.8' in text
    assert ReportService.read_json(path) == {"label": "trace µs", "H": 0.8}


def test_nested_paths_are_created(reports):
    path = reports.write_table(pd.DataFrame({"a": [1.5]}), os.path.join("plots", "a.csv"))
    assert os.path.isfile(path)


def test_safe_name():
    assert safe_name("H0.8_N1024_A0.5_M512") == "H0.8_N1024_A0.5_M512"
    assert safe_name("theory(alpha=-0.6)") == "theory_alpha=-0.6"


class TestExperimentFiles:

    @pytest.fixture
    def step_report(self):
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[1024], seeds_per_cell=2,
                                  step_amplitudes=[0.0, 1.0], step_delays=[0.5])
        return ExperimentService().run(config)

    def test_csv_layout(self, reports, step_report):
        written = reports.write_experiment(step_report)

        summary = ReportService.read_table(written["summary"])
        assert len(summary) == 2
        assert summary["mean_shift"].iloc[0] == 0.0
        assert len(ReportService.read_table(written["seeds"])) == 4
        assert ReportService.read_json(written["metadata"])["config"]["experiment"] == "step-robustness"
        curve_files = [key for key in written if key.startswith("curve:")]
        assert len(curve_files) == 2
        assert os.path.dirname(written[curve_files[0]]).endswith("step_robustness_curves")

    def test_json_layout(self, reports, step_report):
        written = reports.write_experiment(step_report, stem="sweep", fmt="json")
        document = ReportService.read_json(written["report"])

        assert document["kind"] == "step-robustness"
        assert len(document["cells"]) == 2
        assert len(document["curves"]) == 2

    def test_rerun_writes_identical_csv(self, tmp_path, step_report):
        config = ExperimentConfig(experiment="step-robustness", h_list=[0.8], n_list=[1024], seeds_per_cell=2,
                                  step_amplitudes=[0.0, 1.0], step_delays=[0.5])
        again = ExperimentService().run(config)
        first = ReportService(str(tmp_path / "a")).write_experiment(step_report)
        second = ReportService(str(tmp_path / "b")).write_experiment(again)

        for key in ("summary", "seeds"):
            with open(first[key], "rb") as a, open(second[key], "rb") as b:
                assert a.read() == b.read()

    def test_failed_cell_stats_are_null(self, reports):
        config = ExperimentConfig(experiment="convergence", h_list=[0.75], n_list=[1024, 4096], seeds_per_cell=2,
                                  generated_n=2048)
        written = reports.write_experiment(ExperimentService().run(config), fmt="json")

        def reject(constant):
            raise ValueError(f"non-standard JSON constant {constant}")

        with open(written["report"], encoding="utf-8") as fh:
            document = json.loads(fh.read(), parse_constant=reject)
        failed = document["cells"][1]
        assert failed["status"] == "failed"
        assert failed["mean"] is None
        assert failed["std"] is None
        assert document["cells"][0]["mean"] is not None
