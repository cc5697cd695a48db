"""CLI harness: subcommands, outputs, determinism, exit codes."""

import numpy as np
import pytest

from gtlab.cli import main
from gtlab.profiles import RelaxationProfile
from gtlab.torus import GridFunction


def run(*argv) -> int:
    return main(list(argv))


class TestSigmaParsing:
    def test_const(self):
        p = RelaxationProfile.parse("const:5")
        assert p.is_constant and p.sigma_min == 5.0

    def test_piecewise(self):
        p = RelaxationProfile.parse("pc:1@pi,4@2pi")
        assert p.as_two_piece() == (1.0, 4.0)
        assert p.sigma_min == 1.0 and p.sigma_max == 4.0

    def test_piecewise_numeric_breaks(self):
        p = RelaxationProfile.parse("pc:2@3.14159265358979,3@2pi")
        assert len(p.pieces) == 2

    def test_file(self, tmp_path):
        f = GridFunction.constant(2.0, 32)
        path = tmp_path / "sigma.csv"
        f.to_csv(path)
        p = RelaxationProfile.parse(f"file:{path}")
        assert p.sigma_min == 2.0

    def test_left_limit_at_jumps(self):
        p = RelaxationProfile.parse("pc:1@pi,4@2pi")
        samples = p.sample(8)
        assert samples[0] == 4.0  # node 0 == 2pi belongs to the second piece
        assert samples[4] == 1.0  # node pi keeps the left-limit value

    def test_bad_spec(self):
        with pytest.raises(Exception):
            RelaxationProfile.parse("nope:1")


class TestSubcommands:
    def test_simulate_2v(self, tmp_path):
        out = tmp_path / "o"
        code = run(
            "simulate-2v", "--sigma", "const:1", "--n", "128",
            "--t-final", "10", "--out", str(out),
        )
        assert code == 0
        assert (out / "trajectory.csv").exists()
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0].startswith("series,theta,theoretical_rate,fitted_rate")
        assert len(summary) >= 3

    def test_simulate_2v_defective_envelope_row(self, tmp_path):
        out = tmp_path / "o"
        code = run(
            "simulate-2v", "--sigma", "const:2", "--eps", "0.1", "--n", "128",
            "--t-final", "20", "--out", str(out),
        )
        assert code == 0
        assert "pair_norm_envelope" in (out / "summary.csv").read_text()

    def test_simulate_3v(self, tmp_path):
        out = tmp_path / "o"
        code = run(
            "simulate-3v", "--sigma", "const:1", "--n", "128",
            "--t-final", "15", "--out", str(out),
        )
        assert code == 0
        assert (out / "summary.csv").exists()

    def test_rates_piecewise(self, tmp_path):
        out = tmp_path / "o"
        assert run("rates", "--sigma", "pc:1@pi,4@2pi", "--out", str(out)) == 0
        text = (out / "rates.csv").read_text()
        assert "perturbative" in text and "three-velocity" in text

    def test_modal_report(self, tmp_path):
        out = tmp_path / "o"
        assert run("modal-report", "--sigma", "const:5", "--kmax", "10", "--out", str(out)) == 0
        rows = (out / "modal_report.csv").read_text().splitlines()
        assert len(rows) == 11

    def test_poincare_with_improve(self, tmp_path):
        out = tmp_path / "o"
        code = run("poincare", "--sigma", "pc:1@pi,4@2pi", "--improve", "--out", str(out))
        assert code == 0
        assert (out / "poincare.csv").exists()
        iterates = (out / "iterates.csv").read_text().splitlines()
        assert len(iterates) > 3

    def test_telegrapher(self, tmp_path):
        out = tmp_path / "o"
        assert run("telegrapher", "--sigma", "pc:1@pi,4@2pi", "--out", str(out)) == 0
        summary = (out / "telegrapher_summary.csv").read_text().splitlines()
        header = summary[0].split(",")
        values = dict(zip(header, summary[1].split(",")))
        assert float(values["gap"]) == pytest.approx(2.72831, abs=1e-3)
        assert float(values["alpha_bs"]) == pytest.approx(0.86845, abs=1e-3)

    def test_appendix_a_ordering(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run("appendix-a", "--out", str(out)) == 0
        rows = (out / "comparison.csv").read_text().splitlines()[1:]
        rates = [float(r.split(",")[1]) for r in rows]
        assert rates[0] < rates[1] < rates[2]
        assert "ordering holds" in capsys.readouterr().out

    def test_rate_curve_shape(self, tmp_path):
        out = tmp_path / "o"
        assert run("rate-curve", "--grid", "0.1:10:120", "--out", str(out)) == 0
        rows = (out / "rate_curve.csv").read_text().splitlines()[1:]
        sig = np.array([float(r.split(",")[0]) for r in rows])
        mu = np.array([float(r.split(",")[1]) for r in rows])
        assert not np.any(np.abs(sig - 2.0) < 1e-12)
        below = mu[sig < 2.0]
        above = mu[sig > 2.0]
        assert np.all(np.diff(below) > 0)  # increasing on (0, 2)
        assert np.all(np.diff(above) < 0)  # decreasing on (2, inf)
        tail = mu[sig > 5.0] * sig[sig > 5.0]
        assert np.all((0.5 < tail) & (tail < 2.0))  # O(1/sigma) tail


class TestDeterminismAndConfig:
    def test_identical_seed_gives_identical_bytes(self, tmp_path):
        args = [
            "simulate-2v", "--sigma", "pc:1@pi,4@2pi", "--n", "128",
            "--t-final", "5", "--u0", "random", "--v0", "random", "--seed", "42",
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(*args, "--out", str(out1)) == 0
        assert run(*args, "--out", str(out2)) == 0
        for name in ("trajectory.csv", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_different_seed_differs(self, tmp_path):
        base = [
            "simulate-2v", "--sigma", "const:1", "--n", "128", "--t-final", "5",
            "--u0", "random", "--v0", "random",
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(*base, "--seed", "1", "--out", str(out1)) == 0
        assert run(*base, "--seed", "2", "--out", str(out2)) == 0
        assert (out1 / "trajectory.csv").read_bytes() != (out2 / "trajectory.csv").read_bytes()

    def test_config_file_with_cli_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# run configuration\n"
            "sigma = const:1\n"
            "n = 128\n"
            "t_final = 5\n"
        )
        out = tmp_path / "o"
        code = run(
            "simulate-2v", "--config", str(cfg), "--t-final", "6", "--out", str(out)
        )
        assert code == 0
        last = (out / "trajectory.csv").read_text().splitlines()[-1]
        assert float(last.split(",")[0]) == pytest.approx(6.0, abs=0.05)


class TestExitCodes:
    def test_validation_failure(self, tmp_path):
        assert run("rates", "--sigma", "const:0", "--out", str(tmp_path / "o")) == 2

    def test_bad_sigma_spec(self, tmp_path):
        assert run("rates", "--sigma", "huh:1", "--out", str(tmp_path / "o")) == 2

    def test_numerical_failure(self, tmp_path):
        # far-too-small search strip: no eigenvalues found
        code = run(
            "simulate-2v", "--sigma", "const:1", "--n", "128", "--t-final", "0.5",
            "--dt", "0.01", "--out", str(tmp_path / "o"),
        )
        assert code == 2  # dt incommensurate with dx for the split scheme

    def test_numerical_failure_exit_three(self, tmp_path, monkeypatch):
        import gtlab.cli as cli
        from gtlab.errors import NumericalError

        def boom(*a, **k):
            raise NumericalError("no roots")

        monkeypatch.setattr(cli.tele_mod, "telegrapher_gap", boom)
        assert run("telegrapher", "--out", str(tmp_path / "o")) == 3
