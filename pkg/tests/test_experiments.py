import json
import os

import numpy as np
import pytest

from cavitation import ConfigError, RadialField
from cavitation.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from cavitation.config import ExperimentConfig, RunManifest, parse_text


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _keyvals(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


class TestConfig:
    def test_parse_text(self):
        got = parse_text("# comment\nrun.lambda = 1.01  # trailing\n\nmaterial.n=3\n")
        assert got == {"run.lambda": "1.01", "material.n": "3"}

    @pytest.mark.parametrize("text", ["run.lambda 1.0", "run.lamda = 1.0"])
    def test_parse_errors_name_the_line(self, text):
        with pytest.raises(ConfigError, match="<string>:1"):
            parse_text(text)

    def test_presets(self):
        c1 = ExperimentConfig.load()
        assert c1.material().vol.D == pytest.approx(11 / 6)
        assert c1.eps_list == [0.3, 0.2, 1e-4]
        c2 = ExperimentConfig.load(preset="example2")
        assert c2.C_list == [20, 40, 80, 160, 320, 640]
        assert c2.material(C=640).vol.C == 640

    @pytest.mark.parametrize("overrides", [
        {"run.eps_list": "0.1, 0.2"},
        {"run.eps_list": "1.5"},
        {"run.lambda": "-1"},
        {"run.lambda": "abc"},
        {"material.h.kind": "ogden"},
        {"material.n": "4"},
        {"material.kappa": "-1"},
        {"run.direction": "up"},
        {"output.emit_plots": "maybe"},
    ])
    def test_validation(self, overrides):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=overrides)

    def test_unknown_preset_and_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(preset="example9")
        with pytest.raises(ConfigError):
            ExperimentConfig.load(tmp_path / "nope.cfg")

    def test_file_then_overrides(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("run.lambda = 0.95\nrun.eps_list = 0.2\n")
        cfg = ExperimentConfig.load(p, overrides={"run.eps_list": "0.1", "run.lambda": None})
        assert cfg.lam == 0.95 and cfg.eps_list == [0.1]

    def test_hash_tracks_content(self):
        a = ExperimentConfig.load()
        assert a.hash() == ExperimentConfig.load().hash()
        assert a.hash() != ExperimentConfig.load(overrides={"run.lambda": "1.01"}).hash()

    def test_manifest_refuses_missing_files(self, tmp_path):
        man = RunManifest("x", "0")
        man.add(tmp_path / "ghost.csv")
        with pytest.raises(ConfigError):
            man.write(tmp_path)


class TestCli:
    def test_solve_outputs(self, tmp_path):
        code, out = _run(tmp_path, "solve", "--lambda", "1.05", "--eps", "0.2")
        assert code == EXIT_OK
        man = json.loads((out / "manifest.json").read_text())
        assert man["command"] == "solve" and not RunManifest(**man).missing()
        f = RadialField.from_csv(out / "solve_lam1.05_eps0.2.csv")
        assert f.cavity == pytest.approx(0.4620324, abs=1e-6)
        meta = _keyvals(out / "solve_lam1.05_eps0.2.meta")
        assert meta["status"] == "converged"

    def test_reruns_are_bit_identical(self, tmp_path):
        args = ("solve", "--lambda", "1.05", "--eps", "0.3")
        _, a = _run(tmp_path, *args, name="a")
        _, b = _run(tmp_path, *args, name="b")
        for fname in os.listdir(a):
            if fname != "manifest.json":
                assert (a / fname).read_bytes() == (b / fname).read_bytes(), fname

    def test_every_csv_reparses(self, tmp_path):
        code, out = _run(tmp_path, "sweep-eps", "--lambda", "1.05", "--eps", "0.3,0.2")
        assert code == EXIT_OK
        man = json.loads((out / "manifest.json").read_text())
        profiles = [p for p in man["outputs"] if p.endswith(".csv") and "_that" not in p
                    and "sweep_" not in p]
        assert len(profiles) == 2
        for p in profiles:
            RadialField.from_csv(p)
        table = np.genfromtxt(out / "sweep_lam1.05.csv", delimiter=",", names=True, dtype=None,
                              encoding=None)
        assert list(table["eps"]) == [0.3, 0.2]

    def test_critical(self, tmp_path):
        code, out = _run(tmp_path, "critical")
        assert code == EXIT_OK
        info = _keyvals(out / "critical.txt")
        assert float(info["lambda_c"]) == pytest.approx(1.0258, abs=1e-3)
        RadialField.from_csv(out / "critical_profile.csv")

    def test_check(self, tmp_path):
        code, out = _run(tmp_path, "check", "--lambda", "1.05", "--eps", "0.2")
        assert code == EXIT_OK
        lines = (out / "check_lam1.05_eps0.2.txt").read_text().splitlines()
        assert lines and all(line.startswith("PASS") for line in lines)

    def test_incompressible_single_C(self, tmp_path):
        code, out = _run(tmp_path, "incompressible", "--C-list", "20")
        assert code == EXIT_OK
        info = _keyvals(out / "incompressible.txt")
        assert float(info["cavity_inc"]) == pytest.approx(0.540184, abs=1e-6)
        assert float(info["energy_inc"]) == pytest.approx(1.53013, abs=2e-3)

    def test_config_error_exit_code(self, tmp_path, capsys):
        code, _ = _run(tmp_path, "solve", "--eps", "2.0")
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_solver_error_exit_code(self, tmp_path, monkeypatch):
        from cavitation import NumericalError, solver

        def fail(*a, **k):
            raise NumericalError("synthetic")

        monkeypatch.setattr(solver, "solve_punctured", fail)
        code, _ = _run(tmp_path, "solve", "--eps", "0.3")
        assert code == EXIT_SOLVER

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("run.lambda = 0.95\nrun.eps_list = 0.3\nrun.mesh.nodes = 512\n")
        code, out = _run(tmp_path, "solve", "--config", str(cfg))
        assert code == EXIT_OK
        f = RadialField.from_csv(out / "solve_lam0.95_eps0.3.csv")
        assert len(f.R) == 512 and f.lam == pytest.approx(0.95, abs=1e-9)

    def test_plots(self, tmp_path):
        pytest.importorskip("matplotlib")
        code, out = _run(tmp_path, "sweep-eps", "--eps", "0.3,0.2", "--emit-plots")
        assert code == EXIT_OK
        svgs = sorted(p for p in os.listdir(out) if p.endswith(".svg"))
        assert svgs == ["sweep_lam1.05_That.svg", "sweep_lam1.05_r.svg"]
        assert (out / svgs[0]).read_text().lstrip().startswith("<?xml")
