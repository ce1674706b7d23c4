import json

import numpy as np
import pytest

from hysterm.cli import main
from hysterm.config import ENV_OUT, ExperimentConfig, config_from_mapping, load_config
from hysterm.errors import ParseError, ValidationError
from hysterm.experiment import read_solution, run_experiment
from hysterm.presets import PRESETS

SMALL = "nx: 101\ndt: 1.0e-4\nT: 0.01\n"


def _write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadConfig:
    def test_defaults(self, tmp_path):
        cfg = load_config(_write(tmp_path, "preset: single_up\n"))
        assert (cfg.nx, cfg.dt, cfg.T) == (401, 1e-5, 0.01)
        assert cfg.mode == "both" and cfg.effective_tol_fp == pytest.approx(1 / 1600)
        assert cfg.refinements == [(201, 4e-5), (401, 1e-5)]

    def test_positive_alpha(self, tmp_path):
        with pytest.raises(ValidationError) as info:
            load_config(_write(tmp_path, "preset: single_up\nalpha: 0.5\n"))
        assert info.value.field == "alpha"

    def test_unknown_preset(self, tmp_path):
        with pytest.raises(ValidationError) as info:
            load_config(_write(tmp_path, "preset: zigzag\n"))
        assert info.value.field == "preset"
        assert all(name in str(info.value) for name in PRESETS)

    def test_bad_yaml(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(_write(tmp_path, "preset: [unclosed\n"))

    def test_not_a_mapping(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(_write(tmp_path, "- a\n- b\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(tmp_path / "absent.yaml")

    @pytest.mark.parametrize(
        "extra,field",
        [
            ("nx: 2\n", "nx"),
            ("T: 2\n", "T"),
            ("mode: sideways\n", "mode"),
            ("refinements: [[101]]\n", "refinements[0]"),
            ("colour: blue\n", "colour"),
            ("nx: 10.5\n", "nx"),
        ],
    )
    def test_field_paths(self, tmp_path, extra, field):
        with pytest.raises(ValidationError) as info:
            load_config(_write(tmp_path, "preset: single_up\n" + extra))
        assert info.value.field == field

    def test_refinements_parsed(self, tmp_path):
        cfg = load_config(_write(tmp_path, "preset: nt_parabola_beta\nrefinements: [[101, 1.0e-4], [201, 2.5e-5]]\n"))
        assert cfg.refinements == [(101, 1e-4), (201, 2.5e-5)]

    def test_out_dir_precedence(self, tmp_path, monkeypatch):
        cfg = config_from_mapping({"preset": "single_up", "out_dir": "from_config"})
        monkeypatch.delenv(ENV_OUT, raising=False)
        assert cfg.resolved_out_dir().name == "from_config"
        monkeypatch.setenv(ENV_OUT, str(tmp_path / "env"))
        assert cfg.resolved_out_dir() == tmp_path / "env"
        assert cfg.resolved_out_dir(str(tmp_path / "flag")) == tmp_path / "flag"

    def test_default_out_dir(self, monkeypatch):
        monkeypatch.delenv(ENV_OUT, raising=False)
        assert str(ExperimentConfig(preset="two_branch").resolved_out_dir()) == "runs/two_branch"


class TestRun:
    def test_both_mode_artifacts(self, tmp_path):
        cfg = config_from_mapping({"preset": "single_up", "nx": 101, "dt": 1e-4, "T": 0.01})
        art = run_experiment(cfg, out_dir=tmp_path / "run")
        assert art.failures == []
        header = (tmp_path / "run" / "boundary.csv").read_text().splitlines()[0]
        assert header == "t,s_1,rho_1"
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        fx = report["fp_vs_relay"]
        assert fx["distance"] <= fx["tol_xmatch"] and fx["passed"]
        assert report["fixedpoint"]["converged"]

    def test_round_trip(self, tmp_path):
        cfg = config_from_mapping({"preset": "single_down_beta", "nx": 51, "dt": 1e-4, "T": 0.005, "mode": "relay"})
        art = run_experiment(cfg, out_dir=tmp_path)
        t, x, u, H = read_solution(tmp_path / "solution.csv")
        assert np.array_equal(u, art.solution)
        assert np.array_equal(H, art.H)
        assert u.shape == (51, 51)
        assert (tmp_path / "boundary.csv").read_text().splitlines()[0] == "t,rho_1"

    def test_deterministic(self, tmp_path):
        cfg = config_from_mapping({"preset": "two_branch", "nx": 101, "dt": 1e-4, "T": 0.005})
        run_experiment(cfg, out_dir=tmp_path / "a")
        run_experiment(cfg, out_dir=tmp_path / "b")
        for name in ("solution.csv", "boundary.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_sleeping_boundary(self, tmp_path):
        cfg = config_from_mapping({"preset": "flat_sleeping", "nx": 101, "dt": 1e-4, "T": 0.01, "mode": "fixedpoint"})
        run_experiment(cfg, out_dir=tmp_path)
        data = np.loadtxt(tmp_path / "boundary.csv", delimiter=",", skiprows=1)
        assert np.all(data[:, 1] == 0.5)

    def test_nontransversal_relay(self, tmp_path):
        cfg = config_from_mapping({"preset": "nt_parabola_beta", "nx": 101, "dt": 1e-4, "T": 0.01, "refinements": [[101, 1e-4], [201, 2.5e-5]]})
        art = run_experiment(cfg, out_dir=tmp_path)
        assert art.report["fixedpoint"]["refused"]
        assert art.report["pattern"]["qualitative"]
        assert len(art.report["pattern"]["sup_distances"]) == 1

    def test_phi_file(self, tmp_path):
        x = np.linspace(0, 1, 51)
        phi = -0.1 + 0.5 * (x - 0.5) * (1 - (2 * (x - 0.5)) ** 2 / 3)
        h0 = np.where(x <= 0.5, 1, -1)
        h0[(phi <= -0.1) | (phi >= 0.1)] = 0
        np.savetxt(tmp_path / "phi.csv", np.column_stack((phi, h0)), delimiter=",", header="phi,h0", comments="")
        cfg = load_config(_write(tmp_path, "phi_file: phi.csv\nnx: 51\ndt: 1.0e-4\nT: 0.002\n"))
        art = run_experiment(cfg, out_dir=tmp_path / "out")
        assert art.report["branches"][0]["variant"] == 1


class TestCli:
    def test_presets(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out
        assert all(name in out for name in PRESETS)
        assert "401" in out and "1e-05" in out

    def test_check(self, tmp_path, capsys):
        assert main(["check", "--config", str(_write(tmp_path, "preset: single_up\n"))]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_check_invalid(self, tmp_path, capsys):
        assert main(["check", "--config", str(_write(tmp_path, "preset: single_up\nalpha: 0.5\n"))]) == 2
        assert "alpha" in capsys.readouterr().err

    def test_run(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_OUT, str(tmp_path / "env"))
        cfg = _write(tmp_path, "preset: single_up\n" + SMALL)
        assert main(["run", "--config", str(cfg)]) == 0
        assert (tmp_path / "env" / "report.json").exists()
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "flag"), "--mode", "relay"]) == 0
        assert (tmp_path / "flag" / "boundary.csv").read_text().startswith("t,rho_1\n")

    def test_fixedpoint_refused_for_touch(self, tmp_path):
        cfg = _write(tmp_path, "preset: nt_parabola_alpha\nmode: fixedpoint\n" + SMALL)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_failure_exit_status(self, tmp_path):
        cfg = _write(tmp_path, "preset: single_up\nmax_iter: 1\ntol_fp: 1.0e-12\n" + SMALL)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 1
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--allow-fail"]) == 0
        report = json.loads((tmp_path / "b" / "report.json").read_text())
        assert "fixedpoint_not_converged" in report["failures"]

