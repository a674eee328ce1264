import json
import math
import subprocess
import sys

import numpy as np
import pytest

from landau_spectral.basis import load_state_csv, nullspace_norm, s2_norm
from landau_spectral.cli import (
    RunConfig,
    build_initial_state,
    example_dirac_coefficient,
    init_example_dirac,
    init_from_file,
    init_single_mode,
    main,
)
from landau_spectral.errors import ConfigError, StateFileError


def double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class TestExampleDirac:
    def test_coefficients_exact(self):
        # Gamma(k+3/2) = (2k+1)!! sqrt(pi) / 2^(k+1) makes the square a
        # rational number: coef(k)^2 = (2k+1)!! / (2^k k!)
        for k in range(2, 41):
            want = math.sqrt(double_factorial(2 * k + 1) / (2.0**k * math.factorial(k)))
            assert example_dirac_coefficient(k) == pytest.approx(want, rel=1e-13)

    def test_k2_value(self):
        assert example_dirac_coefficient(2) == pytest.approx(math.sqrt(15 / 8), rel=1e-14)
        assert example_dirac_coefficient(2) == pytest.approx(1.36931, abs=1e-5)

    def test_state_contents(self):
        state = init_example_dirac(12)
        assert state[(2, 0, 0)] == pytest.approx(math.sqrt(15 / 8), rel=1e-13)
        for k in range(2, 7):
            assert state[(k, 0, 0)] != 0
        assert s2_norm(state) == 0.0
        assert nullspace_norm(state) == 0.0

    def test_growth_band(self):
        for k in range(10, 61):
            ratio = example_dirac_coefficient(k) / k**0.25
            assert 0.9 <= ratio <= 1.3


class TestInitBuilders:
    def test_single_mode(self):
        state = init_single_mode(4, (0, 2, 0), 1.0 + 2.0j)
        assert state[(0, 2, 0)] == 1.0 + 2.0j

    def test_from_file(self, tmp_path, caplog):
        path = tmp_path / "init.csv"
        path.write_text("n,l,m,re,im\n0,2,0,1.0,0.0\n")
        state = init_from_file(path, 4)
        assert state[(0, 2, 0)] == 1.0

    def test_from_file_rejects_bad_mode(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("n,l,m,re,im\n0,2,3,1.0,0.0\n")
        with pytest.raises(StateFileError):
            init_from_file(path, 4)


class TestRunConfig:
    def base(self, tmp_path, **over):
        raw = {
            "truncation": 2,
            "alpha": 0.0,
            "dt": 0.001,
            "t_final": 0.5,
            "init": {"kind": "single-mode", "mode": [0, 2, 0], "amplitude": 1.0},
            "output": {
                "diagnostics": str(tmp_path / "diag.csv"),
                "final_state": str(tmp_path / "final.csv"),
            },
            "tensor_dir": str(tmp_path / "cache"),
        }
        raw.update(over)
        return raw

    def test_defaults(self, tmp_path):
        cfg = RunConfig.from_dict(self.base(tmp_path))
        assert cfg.method == "etd-rk4"
        assert cfg.c1 == 0.05

    def test_missing_field(self, tmp_path):
        raw = self.base(tmp_path)
        del raw["alpha"]
        with pytest.raises(ConfigError, match="alpha"):
            RunConfig.from_dict(raw)

    def test_invalid_c1(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(self.base(tmp_path, c1=2.0))

    def test_unknown_init_kind(self, tmp_path):
        cfg = RunConfig.from_dict(self.base(tmp_path, init={"kind": "nope"}))
        with pytest.raises(ConfigError):
            build_initial_state(cfg)


def run_cli(args):
    return subprocess.run(
        [sys.executable, "-m", "landau_spectral.cli", *args],
        capture_output=True,
        text=True,
    )


class TestRunCommand:
    def write_config(self, tmp_path, **over):
        raw = {
            "truncation": 2,
            "alpha": 0.0,
            "c1": 0.05,
            "dt": 0.001,
            "t_final": 0.5,
            "method": "etd-rk4",
            "init": {"kind": "single-mode", "mode": [0, 2, 0], "amplitude": 1.0},
            "output": {
                "diagnostics": str(tmp_path / "diag.csv"),
                "final_state": str(tmp_path / "final.csv"),
            },
            "tensor_dir": str(tmp_path / "cache"),
        }
        raw.update(over)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(raw))
        return path

    def test_single_mode_decay(self, tmp_path):
        cfg = self.write_config(tmp_path)
        assert main(["run", "--config", str(cfg)]) == 0
        lines = (tmp_path / "diag.csv").read_text().strip().splitlines()
        assert lines[0] == "t,q_alpha_norm,gs_norm,s2_norm,nullspace_residual,energy_integral"
        last = lines[-1].split(",")
        assert float(last[0]) == pytest.approx(0.5)
        assert float(last[1]) == pytest.approx(math.exp(-6.0), rel=1e-8)
        final = load_state_csv(tmp_path / "final.csv")
        assert complex(final[(0, 2, 0)]) == pytest.approx(math.exp(-6.0), rel=1e-8)

    def test_cascade_requires_invariant_free_init(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            method="cascade",
            init={"kind": "single-mode", "mode": [0, 1, 0], "amplitude": 1.0},
        )
        proc = run_cli(["run", "--config", str(cfg)])
        assert proc.returncode == 1
        err = json.loads(proc.stderr.strip().splitlines()[-1])
        assert err["error"]["type"] == "NullSpaceError"

    def test_warm_cache_skips_build(self, tmp_path):
        cfg = self.write_config(tmp_path)
        first = run_cli(["run", "--config", str(cfg)])
        second = run_cli(["run", "--config", str(cfg)])
        assert first.returncode == 0 and second.returncode == 0
        assert "built in" in first.stderr
        assert "loaded from cache" in second.stderr

    def test_deterministic_output(self, tmp_path):
        cfg = self.write_config(tmp_path)
        run_cli(["run", "--config", str(cfg)])
        first = (tmp_path / "diag.csv").read_bytes()
        run_cli(["run", "--config", str(cfg)])
        assert (tmp_path / "diag.csv").read_bytes() == first

    def test_cascade_matches_numeric_run(self, tmp_path):
        cfg_n = self.write_config(tmp_path, truncation=4, t_final=0.25)
        run_cli(["run", "--config", str(cfg_n)])
        numeric = (tmp_path / "diag.csv").read_text()
        cfg_c = self.write_config(tmp_path, truncation=4, t_final=0.25, method="cascade")
        run_cli(["run", "--config", str(cfg_c)])
        exact = (tmp_path / "diag.csv").read_text()
        n_rows = [list(map(float, r.split(","))) for r in numeric.splitlines()[1:]]
        e_rows = [list(map(float, r.split(","))) for r in exact.splitlines()[1:]]
        for a, b in zip(n_rows[::100], e_rows[::100]):
            assert a[1] == pytest.approx(b[1], abs=1e-8)

    def test_trajectory_dump(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            dt=0.1,
            t_final=0.2,
            output={
                "diagnostics": str(tmp_path / "d.csv"),
                "final_state": str(tmp_path / "f.csv"),
                "trajectory": str(tmp_path / "traj.csv"),
            },
        )
        assert main(["run", "--config", str(cfg)]) == 0
        lines = (tmp_path / "traj.csv").read_text().strip().splitlines()
        assert lines[0] == "t,n,l,m,re,im"
        assert len(lines) >= 3


class TestTensorEnv:
    def test_env_overrides_cache_dir(self, tmp_path, monkeypatch):
        import landau_spectral.cli as cli

        monkeypatch.setenv("LANDAU_TENSOR_DIR", str(tmp_path / "envcache"))
        assert cli.resolve_cache_dir("other") == tmp_path / "envcache"
        monkeypatch.delenv("LANDAU_TENSOR_DIR")
        assert cli.resolve_cache_dir("other") == cli.Path("other")


class TestBuildTensorCommand:
    def test_build_and_reload(self, tmp_path):
        assert main(["build-tensor", "--truncation", "4", "--out", str(tmp_path)]) == 0
        from landau_spectral.coupling import load_tensor

        tensor = load_tensor(tmp_path / "coupling_N4.csv", expected_N=4)
        assert tensor.N == 4


class TestVerifyCommand:
    def test_report_shape(self, tmp_path, capsys):
        rc = main(["verify", "--level", "fast", "--seed", "4242", "--out", str(tmp_path / "r.json")])
        out = capsys.readouterr().out
        report = json.loads(out)
        assert rc == 0
        assert report["passed"] is True
        assert report["seed"] == 4242
        names = [c["name"] for c in report["checks"]]
        assert "a2_equality" in names
        assert all("margin" in c for c in report["checks"])
        on_disk = json.loads((tmp_path / "r.json").read_text())
        assert on_disk == report
