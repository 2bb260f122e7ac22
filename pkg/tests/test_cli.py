"""Command line interface: exit codes, determinism, file outputs."""

import json
import subprocess

import numpy as np
import pytest

from torusbayes.cli import main, read_field_csv, write_field_csv
from torusbayes.fields import sample_white_noise
from torusbayes.lattice import build_lattice

RATES_ARGS = ["rates", "--r", "2", "--s", "1.01", "--t", "2", "--t0", "2",
              "--d", "2", "--zeta", "0"]

ESTIMATE_INI = """
[model]
forward = bessel(-1)
prior_cov = bessel(-1) * bessel(-1)
s = 1.01
d = 2
n_per_dim = 16

[estimate]
delta = 0.05
truth = hat
seed = 7
"""

EXPERIMENT_INI = """
[model]
forward = bessel(-1)
prior_cov = bessel(-1) * bessel(-1)
s = 1.01
d = 2
n_per_dim = 16

[experiment]
mode = bayes
deltas = geom(1e-1, 1e-3, 6)
zetas = -3.01, 0
replicates = 8
seed = 3
"""

APPENDIX_INI = """
[model]
forward = bessel(-1)
prior_cov = bessel(-1)
s = 1.01
d = 2
n_per_dim = 64

[experiment]
mode = appendix_b
deltas = geom(0.000158113883008419, 5e-6, 6)
zetas = -1, -0.5, 0, 0.5, 1
replicates = 8
seed = 1
"""


def write_ini(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRates:
    def test_worked_example(self, capsys):
        assert main(RATES_ARGS) == 0
        out = capsys.readouterr().out
        assert "0.2475" in out
        assert "regime=ii" in out
        tau_line = [ln for ln in out.splitlines() if ln.startswith("tau")][0]
        assert abs(float(tau_line.split()[1]) - 0.99) < 1e-12

    def test_missing_flag_is_usage_error(self, capsys):
        assert main(["rates", "--r", "2", "--s", "1.01", "--t", "2"]) == 1

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0


class TestEstimate:
    def test_writes_outputs_and_manifest(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, ESTIMATE_INI)
        out = tmp_path / "run"
        assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "map.csv").exists() and (out / "data.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert float(manifest["posterior_trace_l2"]) > 0

    def test_deterministic_outputs(self, tmp_path):
        cfg = write_ini(tmp_path, ESTIMATE_INI)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["estimate", "--config", cfg, "--out", str(a)]) == 0
        assert main(["estimate", "--config", cfg, "--out", str(b)]) == 0
        for name in ("map.csv", "data.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_larger_delta_larger_posterior_trace(self, tmp_path):
        cfg1 = write_ini(tmp_path, ESTIMATE_INI, "one.ini")
        cfg2 = write_ini(tmp_path, ESTIMATE_INI.replace("delta = 0.05", "delta = 0.1"),
                         "two.ini")
        a, b = tmp_path / "a", tmp_path / "b"
        main(["estimate", "--config", cfg1, "--out", str(a)])
        main(["estimate", "--config", cfg2, "--out", str(b)])
        tr1 = float(json.loads((a / "manifest.json").read_text())["posterior_trace_l2"])
        tr2 = float(json.loads((b / "manifest.json").read_text())["posterior_trace_l2"])
        assert tr2 > tr1

    def test_data_round_trip(self, tmp_path):
        cfg = write_ini(tmp_path, ESTIMATE_INI)
        first = tmp_path / "first"
        main(["estimate", "--config", cfg, "--out", str(first)])
        reuse = ESTIMATE_INI.replace(
            "truth = hat", f"truth = hat\ndata = {first / 'data.csv'}")
        cfg2 = write_ini(tmp_path, reuse, "reuse.ini")
        second = tmp_path / "second"
        assert main(["estimate", "--config", cfg2, "--out", str(second)]) == 0
        assert (first / "data.csv").read_bytes() == (second / "data.csv").read_bytes()
        assert (first / "map.csv").read_bytes() == (second / "map.csv").read_bytes()

    def test_overwrite_refused_then_forced(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, ESTIMATE_INI)
        out = tmp_path / "run"
        assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
        assert main(["estimate", "--config", cfg, "--out", str(out)]) == 2
        assert main(["estimate", "--config", cfg, "--out", str(out), "--force"]) == 0

    def test_bad_config_exits_two(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, ESTIMATE_INI.replace("truth = hat", "truth = what"))
        assert main(["estimate", "--config", cfg, "--out", str(tmp_path / "x")]) == 2

    def test_missing_data_file_exits_three_with_manifest(self, tmp_path, capsys):
        broken = ESTIMATE_INI.replace(
            "truth = hat", f"truth = hat\ndata = {tmp_path / 'no_such.csv'}")
        cfg = write_ini(tmp_path, broken)
        out = tmp_path / "run"
        assert main(["estimate", "--config", cfg, "--out", str(out)]) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "failed"
        assert "no_such" in manifest["error"]

    def test_seed_flag_changes_data(self, tmp_path):
        prior_ini = ESTIMATE_INI.replace("truth = hat", "truth = prior")
        cfg = write_ini(tmp_path, prior_ini)
        a, b = tmp_path / "a", tmp_path / "b"
        main(["estimate", "--config", cfg, "--out", str(a)])
        main(["estimate", "--config", cfg, "--out", str(b), "--seed", "8"])
        assert (a / "data.csv").read_bytes() != (b / "data.csv").read_bytes()


class TestExperiment:
    def test_bayes_outputs(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, EXPERIMENT_INI)
        out = tmp_path / "run"
        assert main(["experiment", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "results.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 6 * 2  # header plus deltas x zetas
        assert lines[0].startswith("experiment,delta,zeta,mean_error")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert len(manifest["fits"]) == 2
        assert (out / "series_zeta-3.01.dat").exists()
        assert (out / "series_zeta+0.dat").exists()

    def test_appendix_b_outputs(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, APPENDIX_INI)
        out = tmp_path / "run"
        assert main(["experiment", "--config", cfg, "--out", str(out)]) == 0
        for z in ("-1", "-0.5", "+0", "+0.5", "+1"):
            assert (out / f"curve_zeta{z}.dat").exists()
            assert (out / f"bound_zeta{z}.dat").exists()
        curve = np.loadtxt(out / "curve_zeta+0.dat")
        assert curve.shape == (6, 2)
        assert abs(curve[-1, 1] - 1.0) < 1e-12

    def test_experiment_overwrite_refused(self, tmp_path, capsys):
        cfg = write_ini(tmp_path, EXPERIMENT_INI)
        out = tmp_path / "run"
        assert main(["experiment", "--config", cfg, "--out", str(out)]) == 0
        assert main(["experiment", "--config", cfg, "--out", str(out)]) == 2


class TestFieldCsv:
    def test_round_trip(self, tmp_path):
        lat = build_lattice(2, 8)
        field = sample_white_noise(lat, np.random.default_rng(0))
        path = tmp_path / "field.csv"
        write_field_csv(field, path)
        back = read_field_csv(path, lat)
        assert np.allclose(back.coeffs, field.coeffs, atol=1e-16)

    def test_wrong_lattice_rejected(self, tmp_path):
        lat = build_lattice(2, 8)
        field = sample_white_noise(lat, np.random.default_rng(0))
        path = tmp_path / "field.csv"
        write_field_csv(field, path)
        with pytest.raises(ValueError):
            read_field_csv(path, build_lattice(2, 16))


def test_console_script(tmp_path):
    result = subprocess.run(["torusbayes"] + RATES_ARGS,
                            capture_output=True, text=True, timeout=60)
    assert result.returncode == 0
    assert "0.2475" in result.stdout
