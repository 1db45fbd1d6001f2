import filecmp
import json
import os

import pytest

from dynheat.cli import main

CONFIG = """\
[domain]
kind = interval
a = 0.0
b = 1.0
x0 = 0.5

[omega]
lo = 0.3
hi = 0.7

[grid]
n = 16

[weight]
s = 0.5
h_weight = 0.5
ell = 2.0

[time]
T = 1.0
dt = 0.02
scheme = crank_nicolson

[impulse]
tau = 0.5

[control]
eps = 0.2, 0.1
kappa = auto
cg_tol = 1e-12
cg_maxit = 400

[ensemble]
count = 6
seed = 7
"""

PIPELINE = ["simulate", "observe", "commutator-check", "control",
            "cost-study", "report"]


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "run.ini"
    path.write_text(CONFIG)
    return str(path)


def run_pipeline(config_path, out_dir, extra=()):
    codes = {}
    for sub in PIPELINE:
        codes[sub] = main([sub, "--config", config_path, "--out", str(out_dir),
                           *extra])
    return codes


@pytest.fixture(scope="module")
def pipeline_dir(config_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    codes = run_pipeline(config_path, out)
    return out, codes


class TestPipeline:
    def test_every_stage_exits_clean(self, pipeline_dir):
        _, codes = pipeline_dir
        assert codes == {sub: 0 for sub in PIPELINE}

    def test_artifacts_exist_with_expected_headers(self, pipeline_dir):
        out, _ = pipeline_dir
        headers = {
            "trajectory.csv": "t,norm",
            "frequency_trace.csv": "t,normF2,N,Q,bound",
            "commutator_residuals.csv": "resolution,spacing,lhs,rhs,rel_residual",
            "cost_study.csv": "eps,sup_cost,kappa,passes",
        }
        for name, header in headers.items():
            text = (out / name).read_text()
            assert text.splitlines()[0] == header, name
        for name in ("simulate.json", "constants.json", "commutator.json",
                     "control_result.json", "cost_study.json", "report.json"):
            json.loads((out / name).read_text())

    def test_report_merges_all_sections_and_passes(self, pipeline_dir):
        out, _ = pipeline_dir
        report = json.loads((out / "report.json").read_text())
        for section in ("simulate", "observe", "commutator", "control",
                        "cost_study"):
            assert report[section] is not None
        assert report["all_passed"] is True
        assert report["simulate"]["contraction"] is True
        assert report["observe"]["bound_violations"] == 0
        assert report["cost_study"]["nondecreasing"] is True

    def test_report_is_idempotent(self, config_path, pipeline_dir):
        out, _ = pipeline_dir
        first = (out / "report.json").read_bytes()
        assert main(["report", "--out", str(out)]) == 0
        assert (out / "report.json").read_bytes() == first


class TestDeterminism:
    def test_pipeline_is_byte_identical_across_runs(self, config_path, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_pipeline(config_path, a)
        run_pipeline(config_path, b)
        names = sorted(os.listdir(a))
        assert names == sorted(os.listdir(b))
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        assert mismatch == [] and errors == []

    def test_threads_do_not_change_bytes(self, config_path, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_pipeline(config_path, a)
        run_pipeline(config_path, b, extra=["--threads", "4"])
        names = sorted(os.listdir(a))
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        assert mismatch == [] and errors == []

    def test_seed_override_changes_results(self, config_path, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["observe", "--config", config_path, "--out", str(a)]) == 0
        assert main(["observe", "--config", config_path, "--out", str(b),
                     "--seed", "99"]) == 0
        assert (a / "constants.json").read_bytes() != (b / "constants.json").read_bytes()


class TestConfigErrors:
    def write(self, tmp_path, text):
        path = tmp_path / "bad.ini"
        path.write_text(text)
        return str(path)

    def test_unknown_key_is_named(self, config_path, tmp_path, capsys):
        bad = self.write(tmp_path, CONFIG.replace("eps = 0.2, 0.1",
                                                  "epsilon = 0.2, 0.1"))
        assert main(["control", "--config", bad, "--out", str(tmp_path)]) == 2
        assert "control.epsilon" in capsys.readouterr().err

    def test_unknown_section_is_named(self, tmp_path, capsys):
        bad = self.write(tmp_path, CONFIG + "\n[penalty]\nweight = 2\n")
        assert main(["simulate", "--config", bad, "--out", str(tmp_path)]) == 2
        assert "penalty" in capsys.readouterr().err

    def test_missing_required_key(self, tmp_path, capsys):
        bad = self.write(tmp_path, CONFIG.replace("x0 = 0.5\n", ""))
        assert main(["simulate", "--config", bad, "--out", str(tmp_path)]) == 2
        assert "domain.x0" in capsys.readouterr().err

    def test_malformed_file(self, tmp_path, capsys):
        bad = self.write(tmp_path, "kind = interval\nno section header\n")
        assert main(["simulate", "--config", bad, "--out", str(tmp_path)]) == 2
        assert "malformed" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        missing = str(tmp_path / "nope.ini")
        assert main(["simulate", "--config", missing, "--out", str(tmp_path)]) == 2
        assert "not found" in capsys.readouterr().err

    def test_config_required_for_runs(self, tmp_path, capsys):
        assert main(["simulate", "--out", str(tmp_path)]) == 2
        assert "needs --config" in capsys.readouterr().err

    def test_bad_thread_count(self, config_path, tmp_path, capsys):
        assert main(["simulate", "--config", config_path, "--out", str(tmp_path),
                     "--threads", "0"]) == 2
        assert "--threads" in capsys.readouterr().err


class TestDegenerateData:
    def test_zero_data_control_is_certified_with_zero_impulse(
            self, tmp_path, config_path):
        cfg = CONFIG + "initial = zero\n"
        path = tmp_path / "zero.ini"
        path.write_text(cfg)
        out = tmp_path / "out"
        assert main(["control", "--config", str(path), "--out", str(out)]) == 0
        doc = json.loads((out / "control_result.json").read_text())
        assert doc["norm_h"] == 0.0
        assert doc["norm_Psi0"] == 0.0
        assert doc["flags"]["target"] is True

    def test_zero_data_observe_is_config_error(self, tmp_path, capsys):
        cfg = CONFIG + "initial = zero\n"
        path = tmp_path / "zero.ini"
        path.write_text(cfg)
        assert main(["observe", "--config", str(path), "--out", str(tmp_path)]) == 2
        assert "zero" in capsys.readouterr().err


class TestReportEdgeCases:
    def test_empty_directory_lists_artifacts(self, tmp_path, capsys):
        assert main(["report", "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        for name in ("simulate.json", "constants.json", "control_result.json"):
            assert name in err

    def test_report_needs_out_or_config(self, capsys):
        assert main(["report"]) == 2
        assert "--out" in capsys.readouterr().err

    def test_partial_report_has_null_sections(self, config_path, tmp_path):
        out = tmp_path / "partial"
        assert main(["control", "--config", config_path, "--out", str(out)]) == 0
        assert main(["report", "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["control"] is not None
        for section in ("simulate", "observe", "commutator", "cost_study"):
            assert report[section] is None
        assert report["all_passed"] is True
