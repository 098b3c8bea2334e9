from __future__ import annotations

# Built-in
import json
import shutil
from pathlib import Path

# Third-Party
import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

# This project
from vmmmapy.config import DEFAULT_CONFIG
from vmmmapy.fourier import CovarianceTable
from vmmmapy import manager
from vmmmapy.manager import app

runner = CliRunner()


def _write(path, data: dict):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestGenerate:
    """The generate command"""

    def test_public_names(self):
        assert manager.__doc__
        for name in manager.__all__:
            assert callable(getattr(manager, name))
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        assert "design-kernel" in result.output

    def test_writes_reference_config(self, tmp_path):
        result = runner.invoke(app, ["generate", str(tmp_path), "--seed", "4", "--reps", "30"])
        assert result.exit_code == 0
        data = json.loads((tmp_path / DEFAULT_CONFIG).read_text(encoding="utf-8"))
        assert data["run"]["master_seed"] == 4
        assert data["run"]["n_reps"] == 30

    def test_refuses_to_overwrite(self, tmp_path):
        assert runner.invoke(app, ["generate", str(tmp_path)]).exit_code == 0
        assert runner.invoke(app, ["generate", str(tmp_path)]).exit_code == 1
        assert runner.invoke(app, ["generate", str(tmp_path), "--overwrite"]).exit_code == 0


class TestCommands:
    """simulate, analyze, design-kernel and lamperti on the reference config"""

    def test_simulate(self, config_file):
        result = runner.invoke(app, ["simulate", "--config", str(config_file), "--quiet"])
        assert result.exit_code == 0
        results = config_file.parent / "results"
        for name in ("field_0000.csv", "field_0000.json", "volatility_0000.csv", "statistics.csv", "summary.json"):
            assert (results / name).is_file()
        summary = json.loads((results / "summary.json").read_text(encoding="utf-8"))
        assert summary["n_reps"] == 20
        assert summary["master_seed"] == 7
        assert len(pd.read_csv(results / "statistics.csv")) == 20

    def test_simulate_is_reproducible(self, config_file, tmp_path):
        for out in ("first", "second"):
            args = ["simulate", "--config", str(config_file), "--quiet", "--reps", "3", "--out", str(tmp_path / out)]
            assert runner.invoke(app, args).exit_code == 0
        first = (tmp_path / "first" / "statistics.csv").read_text(encoding="utf-8")
        assert first == (tmp_path / "second" / "statistics.csv").read_text(encoding="utf-8")

    def test_seed_override(self, config_file):
        args = ["simulate", "--config", str(config_file), "--quiet", "--reps", "2", "--seed", "11"]
        assert runner.invoke(app, args).exit_code == 0
        summary = json.loads((config_file.parent / "results" / "summary.json").read_text(encoding="utf-8"))
        assert summary["master_seed"] == 11
        assert summary["n_reps"] == 2

    def test_analyze(self, config_file):
        result = runner.invoke(app, ["analyze", "--config", str(config_file), "--quiet"])
        assert result.exit_code == 0
        results = config_file.parent / "results"
        char = pd.read_csv(results / "char_X.csv")
        assert char["value"].iloc[0] == 1.0
        report = json.loads((results / "analysis.json").read_text(encoding="utf-8"))
        names = [check["name"] for check in report["checks"]]
        assert "laplace_V(0)" in names
        assert "joint_cf[1,-1]" in names
        assert report["monotonicity"]["passed"]

    def test_design_kernel(self, config_file):
        result = runner.invoke(app, ["design-kernel", "--config", str(config_file), "--quiet"])
        assert result.exit_code == 0
        results = config_file.parent / "results"
        report = json.loads((results / "design.json").read_text(encoding="utf-8"))
        assert report["roundtrip_error"] < 1e-6
        assert report["symmetry_error"] < 1e-12
        assert (results / "designed_kernel.csv").is_file()
        assert (results / "spectrum.csv").is_file()

    def test_design_kernel_on_the_realistic_config(self, tmp_path):
        source = Path(__file__).parent / "realistic_test_environment" / DEFAULT_CONFIG
        path = tmp_path / DEFAULT_CONFIG
        shutil.copyfile(source, path)
        result = runner.invoke(app, ["design-kernel", "--config", str(path), "--quiet"])
        assert result.exit_code == 0
        report = json.loads((tmp_path / "results" / "design.json").read_text(encoding="utf-8"))
        assert report["root"] == "odd"
        assert report["roundtrip_error"] < 1e-3
        assert report["symmetry_error"] < 1e-12

    def test_lamperti(self, config_file):
        result = runner.invoke(app, ["lamperti", "--config", str(config_file), "--quiet", "--reps", "4"])
        assert result.exit_code == 0
        results = config_file.parent / "results"
        report = json.loads((results / "lamperti.json").read_text(encoding="utf-8"))
        assert report["hurst"] == [0.5]
        assert report["rho_at_zero"] == pytest.approx(1.0)
        assert report["rho_min_eigenvalue"] > 0.0
        assert report["spectral_passed"]
        assert (results / "mss_0000.csv").is_file()
        covariances = pd.read_csv(results / "mss_covariance.csv")
        assert len(covariances) == 15
        diagonal = covariances[covariances["t1"] == covariances["s1"]]
        assert np.all(diagonal["mss_covariance"] > 0)
        assert (results / "spectral_consistency.csv").is_file()


class TestExitCodes:
    """Config errors exit with 1, numeric failures with 2"""

    def test_missing_config(self, tmp_path):
        result = runner.invoke(app, ["simulate", "--config", str(tmp_path / "missing.json")])
        assert result.exit_code == 1

    def test_invalid_json(self, tmp_path):
        path = tmp_path / DEFAULT_CONFIG
        path.write_text("{", encoding="utf-8")
        assert runner.invoke(app, ["simulate", "--config", str(path)]).exit_code == 1

    def test_invalid_config(self, config_data, tmp_path):
        config_data["model"]["kernel_g"]["params"]["rate"] = -1.0
        path = _write(tmp_path / DEFAULT_CONFIG, config_data)
        assert runner.invoke(app, ["simulate", "--config", str(path)]).exit_code == 1

    def test_design_needs_a_design_block(self, config_data, tmp_path):
        del config_data["design"]
        path = _write(tmp_path / DEFAULT_CONFIG, config_data)
        assert runner.invoke(app, ["design-kernel", "--config", str(path)]).exit_code == 1

    def test_target_that_is_not_a_covariance(self, config_data, tmp_path):
        box = CovarianceTable.from_function(lambda h: (np.abs(h) <= 1.0).astype(float), 0.05, 401)
        box.to_frame().to_csv(tmp_path / "box.csv", index=False)
        config_data["design"] = {"covariance": {"kind": "table", "path": "box.csv"}}
        path = _write(tmp_path / DEFAULT_CONFIG, config_data)
        result = runner.invoke(app, ["design-kernel", "--config", str(path)])
        assert result.exit_code == 2

    def test_lags_without_zero(self, config_data, tmp_path):
        config_data["design"]["lag_count"] = 400
        path = _write(tmp_path / DEFAULT_CONFIG, config_data)
        assert runner.invoke(app, ["design-kernel", "--config", str(path)]).exit_code == 1
