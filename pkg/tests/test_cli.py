"""CLI surface: exit codes, JSON schema, determinism, config plumbing."""

import json
import math

import pytest

from eqtorus.cli import main


@pytest.fixture()
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


class TestSolveTau:
    def test_nonlimit_json(self, run):
        code, out, _ = run("solve-tau", "--a", "1/4", "--b", "2.1",
                           "--p", "2", "--q", "3", "--r", "0")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema"] == "1"
        assert doc["regime"] == "nonlimit"
        assert max(doc["residuals"].values()) <= 1e-9

    def test_second_limit_rational_a(self, run):
        code, out, _ = run("solve-tau", "--a", "1/2", "--b", "2",
                           "--p", "2", "--q", "3", "--r", "1")
        doc = json.loads(out)
        assert code == 0
        assert doc["regime"] == "second_limit"
        assert doc["tau2"] == 1.0

    def test_first_limit_null_n0(self, run):
        code, out, _ = run("solve-tau", "--a", "0.25", "--b", "1.25",
                           "--p", "1", "--q", "2", "--r", "0")
        doc = json.loads(out)
        assert doc["regime"] == "first_limit"
        assert doc["tau1"] == 0.0
        assert doc["n0"] is None

    def test_infeasible_exit_2(self, run):
        code, out, err = run("solve-tau", "--a", "0", "--b", "0.5",
                             "--p", "1", "--q", "1", "--r", "0")
        assert code == 2
        assert "b^2" in err
        assert out == ""

    def test_deterministic_output(self, run):
        args = ("solve-tau", "--a", "1/4", "--b", "2.1",
                "--p", "2", "--q", "3", "--r", "0")
        _, out1, _ = run(*args)
        _, out2, _ = run(*args)
        assert out1 == out2


class TestValue:
    def test_verdict(self, run):
        code, out, _ = run("value", "--a", "0", "--b", "2",
                           "--p", "1", "--q", "1", "--r", "0")
        doc = json.loads(out)
        assert code == 0
        assert doc["beats_both"] is True
        assert doc["lambda_bar"] > 8 * math.pi
        assert doc["N2"] is None


class TestSpectral:
    def test_one_one_zero(self, run):
        code, out, _ = run("spectral", "--a", "0.3", "--b", "1.4",
                           "--p", "1", "--q", "1", "--r", "0")
        doc = json.loads(out)
        assert code == 0
        assert doc["N2"] == 1
        assert doc["equality"] is True
        assert max(doc["trace_certificates"].values()) <= 1e-7


class TestScan:
    def test_csv_to_file(self, run, tmp_path):
        target = tmp_path / "scan.csv"
        code, out, _ = run("scan", "--p", "1", "--q", "1", "--r", "0",
                           "--a-steps", "2", "--b-steps", "2",
                           "--b-min", "1.3", "--b-max", "1.8",
                           "--out", str(target))
        assert code == 0
        lines = target.read_text().splitlines()
        assert lines[0].startswith("a,b,")
        assert len(lines) == 5
        assert all(line.endswith("ok") for line in lines[1:])


class TestOtsuki:
    def test_mesh_written(self, run, tmp_path):
        target = tmp_path / "mesh.jsonl"
        code, out, _ = run("otsuki", "--pt", "2", "--qt", "3",
                           "--mesh", str(target), "--nx", "4", "--ny", "6")
        doc = json.loads(out)
        assert code == 0
        assert doc["mesh_records"] == 24
        recs = [json.loads(line) for line in target.read_text().splitlines()]
        assert len(recs) == 24
        assert doc["conformality_residual_diag"] <= 1e-8

    def test_bad_ratio_exit_2(self, run):
        code, _, err = run("otsuki", "--pt", "3", "--qt", "4")
        assert code == 2
        assert "ratio" in err


class TestStability:
    def test_hersch(self, run):
        code, out, _ = run("stability", "--report", "hersch", "--b0", "1.0")
        doc = json.loads(out)
        assert code == 0
        assert doc["value"] == pytest.approx(math.pi**2 / 2, abs=1e-12)

    def test_kernel(self, run):
        code, out, _ = run("stability", "--report", "kernel",
                           "--a", "-0.5", "--b", str(math.sqrt(0.75)),
                           "--p", "1", "--r", "1", "--q", "2")
        doc = json.loads(out)
        assert code == 0
        assert max(doc["residuals"]) <= 1e-9
        assert doc["integrability_possible"] is False

    def test_block(self, run):
        code, out, _ = run("stability", "--report", "block",
                           "--a", "0", "--b", "1", "--p", "1", "--r", "0",
                           "--phi0", str(math.pi / 4), "--k", "2", "--l", "1")
        doc = json.loads(out)
        assert code == 0
        assert doc["det_re"] == pytest.approx(75.0, rel=1e-12)


class TestMeshCommand:
    def test_mesh_file(self, run, tmp_path):
        target = tmp_path / "map.jsonl"
        code, out, _ = run("mesh", "--a", "1/4", "--b", "2.1",
                           "--p", "2", "--q", "3", "--r", "0",
                           "--nx", "3", "--ny", "5", "--out", str(target))
        doc = json.loads(out)
        assert code == 0
        assert doc["mesh_records"] == 15
        rec = json.loads(target.read_text().splitlines()[0])
        norm = (rec["re_z1"] ** 2 + rec["im_z1"] ** 2
                + rec["re_z2"] ** 2 + rec["im_z2"] ** 2)
        assert norm == pytest.approx(1.0, abs=1e-12)


class TestConfig:
    def test_config_file_parsed(self, run, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("solver_tol = 1e-13\n# comment\nquadrature_tol = 1e-11\n")
        code, out, _ = run("--config", str(cfg), "solve-tau", "--a", "0",
                           "--b", "2", "--p", "1", "--q", "1", "--r", "0")
        assert code == 0
        assert json.loads(out)["regime"] == "nonlimit"

    def test_env_override(self, run, monkeypatch):
        monkeypatch.setenv("EQTORUS_TOL_OVERRIDE", "10")
        code, out, _ = run("solve-tau", "--a", "0", "--b", "2",
                           "--p", "1", "--q", "1", "--r", "0")
        assert code == 0
        assert max(json.loads(out)["residuals"].values()) <= 1e-8

    def test_bad_env_override(self, monkeypatch):
        monkeypatch.setenv("EQTORUS_TOL_OVERRIDE", "-1")
        from eqtorus.config import tolerances

        with pytest.raises(ValueError):
            tolerances()
