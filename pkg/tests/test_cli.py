"""End-to-end tests of the command-line interface and its exit codes."""

import subprocess
import sys

import numpy as np
import pytest

from hicov import cli


def write_csv_data(path, X):
    """X has shape (p, n); files store one observation per row."""
    np.savetxt(path, np.asarray(X).T, delimiter=",")


@pytest.fixture
def null_file(tmp_path):
    rng = np.random.default_rng(123)
    path = tmp_path / "null.csv"
    write_csv_data(path, rng.standard_normal((5, 80)))
    return path


@pytest.fixture
def spiked_file(tmp_path):
    rng = np.random.default_rng(124)
    X = rng.standard_normal((5, 80))
    X[0] *= 6.0
    path = tmp_path / "spiked.csv"
    write_csv_data(path, X)
    return path


@pytest.fixture
def wide_file(tmp_path):
    """p = 10 > n = 6: outside the likelihood-ratio regime."""
    rng = np.random.default_rng(125)
    path = tmp_path / "wide.csv"
    write_csv_data(path, rng.standard_normal((10, 6)))
    return path


class TestTestCommand:
    def test_null_data_is_not_rejected(self, null_file, capsys):
        code = cli.main(["test", str(null_file), "--test", "lrt", "--alpha", "0.05"])
        out = capsys.readouterr().out
        assert code == 0
        assert "no rejection" in out
        assert "standardized" in out

    def test_spiked_data_is_rejected_with_exit_3(self, spiked_file, capsys):
        for name in ("lrt", "cm", "czz"):
            code = cli.main(["test", str(spiked_file), "--test", name])
            assert code == 3, name
        assert "REJECT" in capsys.readouterr().out

    def test_wide_data_hits_regime_exit_65(self, wide_file, capsys):
        code = cli.main(["test", str(wide_file), "--test", "lrt"])
        assert code == 65
        assert "p < n" in capsys.readouterr().err

    def test_wide_data_still_works_for_czz(self, wide_file):
        code = cli.main(["test", str(wide_file), "--test", "czz"])
        assert code in (0, 3)

    def test_unreadable_file_exits_64(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,not_a_number\n")
        assert cli.main(["test", str(bad), "--test", "lrt"]) == 64

    def test_missing_file_exits_64(self, tmp_path):
        assert cli.main(["test", str(tmp_path / "nope.csv"), "--test", "cm"]) == 64

    def test_unknown_test_exits_64(self, null_file):
        with pytest.raises(SystemExit) as exc:
            cli.main(["test", str(null_file), "--test", "wald"])
        assert exc.value.code == 64

    def test_constant_data_is_singular_exit_66(self, tmp_path, capsys):
        path = tmp_path / "const.csv"
        write_csv_data(path, np.ones((3, 10)))
        code = cli.main(["test", str(path), "--test", "lrt"])
        assert code == 66
        assert "singular" in capsys.readouterr().err.lower()

    def test_delta_flag_shifts_lrt(self, null_file, capsys):
        cli.main(["test", str(null_file), "--test", "lrt", "--delta", "0"])
        base = capsys.readouterr().out
        cli.main(["test", str(null_file), "--test", "lrt", "--delta", "1.5"])
        shifted = capsys.readouterr().out
        assert base != shifted


class TestPowerCommand:
    def test_zero_distance_prints_alpha(self, capsys):
        assert cli.main(["power", "--b", "0", "--y", "0.25", "--alpha", "0.05"]) == 0
        assert "0.0500" in capsys.readouterr().out

    def test_spike_prints_both_families(self, capsys):
        assert cli.main(["power", "--h", "1", "--y", "0.25", "--alpha", "0.05"]) == 0
        out = capsys.readouterr().out
        assert "0.0967" in out          # likelihood-ratio power
        assert "0.1261" in out          # quadratic-distance power, 1 - Phi(z - 1/2)

    def test_rho_route(self, capsys):
        code = cli.main(["power", "--rho", "0.25", "--p", "50", "--n", "200",
                         "--alpha", "0.05"])
        assert code == 0
        assert "0.7495" in capsys.readouterr().out

    def test_needs_exactly_one_alternative(self, capsys):
        assert cli.main(["power", "--y", "0.25"]) == 64
        assert cli.main(["power", "--b", "1", "--h", "1", "--y", "0.25"]) == 64

    def test_b_requires_y(self):
        assert cli.main(["power", "--b", "1"]) == 64

    def test_rho_requires_dimensions(self):
        assert cli.main(["power", "--rho", "0.5"]) == 64

    def test_rho_regime_violation_exits_65(self):
        assert cli.main(["power", "--rho", "0.5", "--p", "60", "--n", "50"]) == 65


class TestSimulateCommand:
    def test_smoke_preset_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "smoke.csv"
        code = cli.main(["simulate", "--preset", "smoke", "--seed", "7",
                         "--out", str(out), "--no-plot"])
        assert code == 0
        text = out.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == ("grid_param,test,n,p,alpha,reps,reject_rate,"
                            "mc_stderr,theory_power,seed")
        assert len(lines) == 1 + 3 * 3  # grid points x tests
        for line in lines[1:]:
            rate = float(line.split(",")[6])
            assert 0.0 <= rate <= 1.0
        assert "master seed: 7" in capsys.readouterr().out

    def test_same_seed_reproduces_csv_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            cli.main(["simulate", "--preset", "smoke", "--seed", "11",
                      "--out", str(path), "--no-plot"])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_env_var_is_used(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "4242")
        out = tmp_path / "env.csv"
        cli.main(["simulate", "--preset", "smoke", "--out", str(out), "--no-plot"])
        assert "master seed: 4242" in capsys.readouterr().out
        assert ",4242" in out.read_text()

    def test_inline_flags_and_theory_columns(self, tmp_path):
        out = tmp_path / "inline.csv"
        code = cli.main([
            "simulate", "--n", "60", "--p", "6", "--tests", "lrt,czz",
            "--grid", "rho:0.5,identity,h:1", "--law", "gamma",
            "--mean", "random-fixed", "--reps", "100", "--seed", "3",
            "--out", str(out), "--no-plot",
        ])
        assert code == 0
        rows = out.read_text().strip().split("\n")[1:]
        assert len(rows) == 6
        cells = [r.split(",") for r in rows]
        by = {(c[0], c[1]): c for c in cells}
        assert by[("0.5", "lrt")][8] != ""     # likelihood prediction defined
        assert by[("0.5", "czz")][8] == ""     # no quadratic prediction here
        assert by[("1", "czz")][8] != ""       # rank-one spike: defined

    def test_config_file_round_trip(self, tmp_path):
        cfg = tmp_path / "campaign.cfg"
        cfg.write_text(
            "# tiny campaign\n"
            "n=50\n"
            "p=5\n"
            "alpha=0.05\n"
            "reps=100\n"
            "law=gaussian\n"
            "mean=zero\n"
            "tests=lrt,cm\n"
            "grid=rho:0.2\n"
            "grid=identity\n"
        )
        out = tmp_path / "cfg.csv"
        code = cli.main(["simulate", "--config", str(cfg), "--seed", "5",
                         "--out", str(out), "--no-plot"])
        assert code == 0
        assert len(out.read_text().strip().split("\n")) == 1 + 4

    def test_config_file_seed_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "seeded.cfg"
        cfg.write_text("n=50\np=5\nreps=100\ntests=lrt\ngrid=identity\nseed=77\nworkers=1\n")
        out = tmp_path / "seeded.csv"
        cli.main(["simulate", "--config", str(cfg), "--out", str(out), "--no-plot"])
        assert "master seed: 77" in capsys.readouterr().out
        cli.main(["simulate", "--config", str(cfg), "--seed", "78",
                  "--out", str(out), "--no-plot"])
        assert "master seed: 78" in capsys.readouterr().out

    def test_config_file_unknown_key_exits_64(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n=50\np=5\nbogus=1\n")
        assert cli.main(["simulate", "--config", str(cfg), "--no-plot"]) == 64

    def test_missing_dimensions_exit_64(self):
        assert cli.main(["simulate", "--no-plot"]) == 64

    def test_renders_figure_and_plot_script(self, tmp_path):
        out = tmp_path / "fig.csv"
        png = tmp_path / "fig.png"
        script = tmp_path / "replot.py"
        code = cli.main(["simulate", "--n", "50", "--p", "5", "--tests", "lrt",
                         "--grid", "rho:0.2,rho:1,rho:4", "--reps", "100",
                         "--seed", "9", "--out", str(out),
                         "--plot", str(png), "--plot-script", str(script)])
        assert code == 0
        assert png.stat().st_size > 1000
        # the emitted script is standalone: rerun it on the CSV
        png.unlink()
        result = subprocess.run([sys.executable, str(script)], capture_output=True,
                                text=True, cwd=tmp_path)
        assert result.returncode == 0, result.stderr
        assert png.stat().st_size > 1000

    def test_default_plot_path_next_to_csv(self, tmp_path):
        out = tmp_path / "auto.csv"
        cli.main(["simulate", "--preset", "smoke", "--seed", "2",
                  "--out", str(out)])
        assert (tmp_path / "auto.png").stat().st_size > 1000


class TestValidateCommand:
    def test_lemma_suite_passes(self, capsys):
        code = cli.main(["validate", "--suite", "lemma1", "--seed", "1",
                         "--reps", "20000"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4
        assert "violations" in out

    def test_oracle_suite_passes(self, capsys):
        code = cli.main(["validate", "--suite", "czz-oracle", "--seed", "2"])
        assert code == 0
        assert "max relative gap" in capsys.readouterr().out

    def test_null_clt_suite_passes_for_gaussian(self, capsys):
        code = cli.main(["validate", "--suite", "null-clt", "--seed", "3",
                         "--reps", "1500"])
        assert code == 0
        out = capsys.readouterr().out
        assert "KS distance" in out

    def test_epsilon_suite_passes(self, capsys):
        code = cli.main(["validate", "--suite", "epsilon", "--seed", "4",
                         "--reps", "1500"])
        assert code == 0
        assert "variance" in capsys.readouterr().out

    def test_unknown_suite_exits_64(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["validate", "--suite", "everything"])
        assert exc.value.code == 64
