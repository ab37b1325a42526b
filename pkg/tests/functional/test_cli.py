import math
import os

import pytest

from dbt_common.exceptions import DbtValidationError

from flickerbound import files
from flickerbound.cli import (
    EXIT_NUMERICAL,
    EXIT_VALIDATION,
    HANDLERS,
    Outcome,
    Subcommand,
    exception_handler,
)
from flickerbound.exceptions import EmbeddingClippingError, QuadratureConvergenceError


def read_rows(path):
    table = files.read_table(str(path))
    return [dict(zip(table.column_names, row)) for row in table.rows]


def test_every_subcommand_has_a_handler():
    assert set(HANDLERS) == set(Subcommand)


class TestHelp:
    @pytest.mark.parametrize(
        ["subcommand", "unit"],
        [("gfactor", "[um]"), ("kappa", "[cm^-1]"), ("sigma", "[s]"), ("synthesize", "[Hz]")],
    )
    def test_help_states_units(self, run_cli, subcommand, unit):
        code, out, _ = run_cli([subcommand, "--help"])
        assert code == 0
        assert unit in out

    def test_version(self, run_cli):
        code, out, _ = run_cli(["--version"])
        assert code == 0
        assert out.startswith("flickerbound ")


class TestInputErrors:
    def test_negative_width_names_the_field(self, run_cli):
        code, out, err = run_cli(["gfactor", "--width-um=-1", "--length-um", "2", "--thickness-nm", "10"])
        assert code == EXIT_VALIDATION
        assert "width_um" in err
        assert out == ""

    def test_missing_subcommand(self, run_cli):
        code, _, err = run_cli([])
        assert code == EXIT_VALIDATION
        assert err.startswith("error:")

    def test_unknown_option(self, run_cli):
        code, _, _ = run_cli(["table1", "--colour", "blue"])
        assert code == EXIT_VALIDATION

    def test_unreadable_input(self, run_cli, tmp_path):
        code, _, err = run_cli(["slope", "--input", tmp_path / "absent.csv", "--f-low", 1, "--f-high", 10])
        assert code == EXIT_VALIDATION
        assert "not readable" in err

    def test_seed_out_of_range(self, run_cli):
        code, _, err = run_cli(["synthesize", "--ou", "1,1", "--n", "64", "--seed", str(2**128)])
        assert code == EXIT_VALIDATION
        assert "seed" in err

    def test_too_few_monte_carlo_samples(self, run_cli):
        code, _, err = run_cli(
            ["gfactor", "--width-um", 1, "--length-um", 2, "--thickness-nm", 10, "--mc-samples", 10]
        )
        assert code == EXIT_VALIDATION
        assert "--mc-samples" in err

    def test_bad_number_list(self, run_cli):
        code, _, err = run_cli(["kappa", "--g", "100", "--u0-volts", "1", "--f-hz", "1,two"])
        assert code == EXIT_VALIDATION
        assert "--f-hz" in err

    def test_kappa_needs_g(self, run_cli):
        code, _, err = run_cli(["kappa"])
        assert code == EXIT_VALIDATION
        assert "--g" in err

    def test_synthesis_needs_a_model(self, run_cli):
        code, _, err = run_cli(["synthesize", "--n", "64"])
        assert code == EXIT_VALIDATION
        assert "--ou" in err


class TestExceptionHandler:
    @pytest.mark.parametrize(
        ["error", "code"],
        [
            (DbtValidationError("bad"), EXIT_VALIDATION),
            (EmbeddingClippingError("clipped 5% of the embedding spectral mass"), EXIT_NUMERICAL),
            (QuadratureConvergenceError("unresolved"), EXIT_NUMERICAL),
        ],
    )
    def test_exit_codes(self, capsys, error, code):
        outcome = Outcome()
        with exception_handler(outcome):
            raise error
        assert outcome.code == code
        assert error.msg in capsys.readouterr().err

    def test_success_leaves_zero(self):
        outcome = Outcome()
        with exception_handler(outcome):
            pass
        assert outcome.code == 0


class TestTableOne:
    def test_bundled_report(self, run_cli, tmp_path):
        path = tmp_path / "table1.csv"
        code, out, _ = run_cli(["table1", "-o", path])
        assert code == 0
        assert "[FLAGGED]" in out
        rows = {r["name"]: r for r in read_rows(path)}
        assert list(rows) == ["V1", "V1.5", "V2", "V5", "V80"]
        assert float(rows["V1"]["kappa_calc"]) == pytest.approx(3.5e-10, rel=0.03)
        assert rows["V80"]["flag"] == "true"
        assert rows["V1"]["flag"] == "false"

    def test_csv_on_stdout_keeps_the_summary_off_it(self, run_cli):
        code, out, err = run_cli(["--log-level", "error", "table1"])
        assert code == 0
        assert out.splitlines()[0] == (
            "name,g_calc,g_reference,kappa_calc,kappa_reference,kappa_measured,"
            "ratio,kappa_measured_over_calc,flag"
        )
        assert len(out.splitlines()) == 6
        assert "V80" in err


class TestGeometry:
    def test_gfactor_from_flags(self, run_cli, tmp_path):
        path = tmp_path / "g.csv"
        code, _, _ = run_cli(
            ["gfactor", "--name", "V1", "--width-um", 1, "--length-um", 2.2, "--thickness-nm", 10, "-o", path]
        )
        assert code == 0
        (row,) = read_rows(path)
        assert float(row["g_per_cm"]) == pytest.approx(9630, rel=0.03)
        assert float(row["thin_film_g_per_cm"]) == pytest.approx(float(row["g_per_cm"]), rel=0.03)

    def test_gfactor_with_monte_carlo(self, run_cli, tmp_path, samples_path):
        path = tmp_path / "g.csv"
        sample = os.path.join(samples_path, "V2.sample")
        code, _, _ = run_cli(["gfactor", "--sample", sample, "--mc-samples", 200000, "--seed", 4, "-o", path])
        assert code == 0
        (row,) = read_rows(path)
        estimate, std_error = float(row["mc_phi_x1_cm2"]), float(row["mc_std_error_cm2"])
        assert abs(estimate - float(row["phi_x1_cm2"])) <= 5 * std_error

    def test_kappa_spectrum(self, run_cli, tmp_path):
        path = tmp_path / "k.csv"
        code, _, _ = run_cli(["kappa", "--g", 9634, "--u0-volts", 0.1, "--f-hz", "10,1", "-o", path])
        assert code == 0
        rows = read_rows(path)
        assert [float(r["f_hz"]) for r in rows] == [1.0, 10.0]
        products = [float(r["f_hz"]) * float(r["value"]) for r in rows]
        assert products[0] == pytest.approx(products[1], rel=1e-11)
        assert products[0] == pytest.approx(9634 * 3.637e-14 * 0.01, rel=1e-3)
        assert rows[0]["units"] == "V^2/Hz"

    def test_kappa_per_species(self, run_cli, tmp_path):
        path = tmp_path / "k.csv"
        code, _, _ = run_cli(["kappa", "--g", 9634, "-o", path])
        assert code == 0
        (row,) = read_rows(path)
        parts = float(row["kappa_electron"]) + float(row["kappa_hole"])
        assert parts == pytest.approx(float(row["kappa"]), rel=1e-12)


class TestSpectral:
    def test_kernels(self, run_cli, tmp_path):
        path = tmp_path / "kernels.csv"
        code, _, _ = run_cli(["kernels", "--omega", 1, "--tm", 1e3, "-o", path])
        assert code == 0
        (row,) = read_rows(path)
        difference = float(row["difference"])
        assert abs(difference + math.pi) <= 0.01 * math.pi
        assert float(row["sinc_residual"]) <= 1e-8

    def test_kernels_at_whole_periods(self, run_cli, tmp_path):
        path = tmp_path / "kernels.csv"
        code, _, _ = run_cli(["kernels", "--omega", 2 * math.pi, "--tm", 1, "-o", path])
        assert code == 0
        (row,) = read_rows(path)
        assert abs(float(row["sign_kernel_exact"])) < 1e-12
        assert float(row["sign_kernel"]) == pytest.approx(0.0, abs=1e-10)

    def test_kernels_with_a_negative_tail(self, run_cli, tmp_path):
        path = tmp_path / "kernels.csv"
        code, _, _ = run_cli(["kernels", "--omega", 1, "--tm", 10, "--sinc-cutoff", 2000, "-o", path])
        assert code == 0
        (row,) = read_rows(path)
        assert float(row["sinc_residual"]) <= 1e-8

    def test_sigma(self, run_cli, tmp_path):
        path = tmp_path / "sigma.csv"
        code, _, _ = run_cli(["sigma", "--ou", "1,1", "--f-hz", "1,0.1", "--tm", 1e3, "-o", path])
        assert code == 0
        rows = read_rows(path)
        for row in rows:
            assert float(row["sigma"]) == pytest.approx(float(row["infinite_window"]), rel=0.01)
            assert float(row["two_term"]) == pytest.approx(float(row["sigma"]), rel=1e-9)

    def test_sigma_rejects_zero_frequency(self, run_cli):
        code, _, err = run_cli(["sigma", "--ou", "1,1", "--f-hz", "0", "--tm", 10])
        assert code == EXIT_VALIDATION
        assert "non-zero" in err


class TestToy:
    def test_verify(self, run_cli, tmp_path):
        path = tmp_path / "toy.csv"
        code, out, _ = run_cli(
            ["toy-verify", "--count", 25, "--seed", 3, "--max-n", 24, "--ladder-steps", 3, "-o", path]
        )
        assert code == 0
        assert "25 systems, 0 violations" in out
        assert out.count("t_m = ") == 3
        rows = read_rows(path)
        assert len(rows) == 25
        assert all(float(r["slack"]) >= -1e-10 for r in rows)


class TestProcessLab:
    def test_synthesis_is_byte_identical(self, run_cli, tmp_path):
        argv = ["synthesize", "--ou", "1,0.05", "--n", 128, "--dt", 0.01, "--count", 3, "--seed", 8]
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(argv + ["-o", first])[0] == 0
        assert run_cli(argv + ["-o", second])[0] == 0
        assert first.read_bytes() == second.read_bytes()
        other = tmp_path / "c.csv"
        run_cli(argv[:-1] + ["9", "-o", other])
        assert other.read_bytes() != first.read_bytes()

    def test_pipeline_recovers_the_exponent(self, run_cli, tmp_path):
        signal, spectrum, slope = tmp_path / "signal.csv", tmp_path / "spectrum.csv", tmp_path / "slope.csv"
        code, _, _ = run_cli(
            ["synthesize", "--gamma", 1.0, "--f-low", 0.5, "--n", 2048, "--dt", 1e-3, "--count", 48, "-o", signal]
        )
        assert code == 0
        assert len(files.read_signal_csv(str(signal))) == 48

        code, _, _ = run_cli(
            ["spectrum", "--input", signal, "--f-low", 10, "--f-high", 100, "--points", 16, "-o", spectrum]
        )
        assert code == 0
        rows = read_rows(spectrum)
        assert len(rows) == 16
        assert all(float(r["std_error"]) > 0 for r in rows)

        code, _, _ = run_cli(["slope", "--input", spectrum, "--f-low", 10, "--f-high", 100, "-o", slope])
        assert code == 0
        (row,) = read_rows(slope)
        assert float(row["gamma_hat"]) == pytest.approx(1.0, abs=0.25)
        assert row["points"] == "16"

    def test_gamma_and_covariance_are_exclusive(self, run_cli):
        code, _, err = run_cli(["synthesize", "--gamma", 1, "--f-low", 1, "--ou", "1,1"])
        assert code == EXIT_VALIDATION
        assert "mutually exclusive" in err
