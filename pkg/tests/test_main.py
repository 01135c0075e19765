import json
from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from app.analytic.certificate import SubcriticalityCertificate
from app.combinatorics.series import TruncatedEGF
from app.main import app
from app.utils.errors import DomainError

runner = CliRunner()


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Every command writes its logs and relative outputs below tmp_path"""
    monkeypatch.setenv("SUBCRITICAL_GK_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def invoke(*args):
    return runner.invoke(app, list(args))


class TestSeriesCommand:
    """Tests for the series command"""

    def test_rooted_trees(self, output_dir):
        result = invoke("series", "--name", "T", "--trunc", "4", "--out", "T.json")
        assert result.exit_code == 0, result.output
        data = json.loads((output_dir / "T.json").read_text())
        assert data["name"] == "T"
        assert data["coeffs"] == ["0/1", "1/1", "1/1", "3/2", "8/3"]
        assert TruncatedEGF.from_dict(data).counts() == [0, 1, 2, 9, 64]

    def test_bivariate(self, output_dir):
        result = invoke("series", "--name", "t_biv", "--trunc", "2", "--out", "t_biv.json")
        assert result.exit_code == 0, result.output
        data = json.loads((output_dir / "t_biv.json").read_text())
        assert data["coeffs"][2] == ["0/1", "0/1", "1/2"]

    def test_upper_series(self, output_dir):
        result = invoke("series", "--name", "Uk", "--k", "1", "--trunc", "3", "--out", "U1.json")
        assert result.exit_code == 0, result.output
        assert json.loads((output_dir / "U1.json").read_text())["coeffs"][1] == "1/1"

    def test_unknown_name(self):
        assert invoke("series", "--name", "nosuch").exit_code == 2

    def test_block_series_needs_positive_k(self):
        assert invoke("series", "--name", "Lk", "--k", "0").exit_code == 2


class TestCensusCommand:
    """Tests for the census command"""

    def test_csv(self, output_dir):
        result = invoke("census", "--k", "1", "--n-max", "4", "--out", "census.csv")
        assert result.exit_code == 0, result.output
        lines = (output_dir / "census.csv").read_text().splitlines()
        assert lines[0] == "n,k,count_A,count_Z,count_B,count_Gk_connected,count_Gk"
        assert lines[4] == "4,1,9,63,10,38,64"

    def test_json(self, output_dir):
        result = invoke("census", "--k", "2", "--n-max", "3", "--format", "json", "--out", "census.json")
        assert result.exit_code == 0, result.output
        rows = json.loads((output_dir / "census.json").read_text())
        assert rows[-1] == {
            "n": 3,
            "k": 2,
            "count_A": 1,
            "count_Z": 8,
            "count_B": 1,
            "count_Gk_connected": 4,
            "count_Gk": 8,
        }

    def test_jobs_give_identical_bytes(self, output_dir):
        assert invoke("census", "--k", "1", "--n-max", "5", "--jobs", "1", "--out", "one.csv").exit_code == 0
        assert invoke("census", "--k", "1", "--n-max", "5", "--jobs", "2", "--out", "two.csv").exit_code == 0
        assert (output_dir / "one.csv").read_bytes() == (output_dir / "two.csv").read_bytes()

    def test_repeated_runs_are_identical(self, output_dir):
        invoke("census", "--k", "2", "--n-max", "4", "--out", "a.csv")
        invoke("census", "--k", "2", "--n-max", "4", "--out", "b.csv")
        assert (output_dir / "a.csv").read_bytes() == (output_dir / "b.csv").read_bytes()

    @pytest.mark.parametrize(
        "args",
        [["--n-max", "9"], ["--format", "xml"], ["--jobs", "0"], ["--k", "-1"]],
    )
    def test_usage_errors(self, args):
        assert invoke("census", *args).exit_code == 2

    def test_library_error_exits_with_one(self):
        with patch("app.main.census_table", side_effect=DomainError("boom")):
            assert invoke("census", "--n-max", "3").exit_code == 1

    def test_unexpected_error_exits_with_one(self):
        with patch("app.main.census_table", side_effect=RuntimeError("worker died")):
            assert invoke("census", "--n-max", "3").exit_code == 1

    def test_config_file(self, output_dir):
        config = output_dir / "run.yaml"
        config.write_text("k: 2\nn_max: 3\nout: from_yaml.csv\n")
        result = invoke("--config", str(config), "census")
        assert result.exit_code == 0, result.output
        lines = (output_dir / "from_yaml.csv").read_text().splitlines()
        assert len(lines) == 4
        assert lines[3].startswith("3,2,")

    def test_flags_override_config_file(self, output_dir):
        config = output_dir / "run.yaml"
        config.write_text("k: 2\nn_max: 3\n")
        result = invoke("--config", str(config), "census", "--n-max", "2", "--out", "flags.csv")
        assert result.exit_code == 0, result.output
        assert len((output_dir / "flags.csv").read_text().splitlines()) == 3

    def test_logs_go_to_output_dir(self, output_dir):
        invoke("census", "--n-max", "2", "--out", "c.csv")
        assert (output_dir / "logs" / "subcritical_gk.log").exists()


class TestNumericCommands:
    """constants, asymptotics and certify"""

    def test_constants_json(self, output_dir):
        result = invoke("constants", "--k", "4", "--format", "json", "--out", "c.json")
        assert result.exit_code == 0, result.output
        record = json.loads((output_dir / "c.json").read_text())[0]
        assert record["eta"] == pytest.approx(0.02354, abs=5e-6)
        assert record["beta_check"] is True

    @pytest.mark.parametrize(
        "args",
        [["series", "--name", "f_biv", "--trunc", "6"], ["constants", "--k", "3"]],
    )
    def test_repeated_runs_are_identical(self, output_dir, args):
        assert invoke(*args, "--out", "first.txt").exit_code == 0
        assert invoke(*args, "--out", "second.txt").exit_code == 0
        assert (output_dir / "first.txt").read_bytes() == (output_dir / "second.txt").read_bytes()

    def test_constants_needs_positive_k(self):
        assert invoke("constants", "--k", "0").exit_code == 2

    def test_asymptotics(self, output_dir):
        result = invoke("asymptotics", "--k", "2", "--trunc", "20", "--out", "a.csv")
        assert result.exit_code == 0, result.output
        lines = (output_dir / "a.csv").read_text().splitlines()
        assert lines[0] == "n,exact_coeff,asymp,ratio"
        assert len(lines) == 21

    def test_invalid_certificate_still_exits_zero(self, output_dir):
        invalid = SubcriticalityCertificate(
            k=2,
            eta=0.1,
            tau=None,
            rho=None,
            cdot_at_rho=None,
            margin=None,
            relative_margin=None,
            diagnostic="no root bracketed",
        )
        with patch("app.main.certify_class", return_value=invalid) as mock_certify:
            result = invoke("certify", "--k", "2", "--trunc", "60", "--tail", "fitted", "--out", "cert.json")
        assert result.exit_code == 0, result.output
        mock_certify.assert_called_once_with(2, 60, oracle_n=6, tail="fitted", tol=1e-10, jobs=1)
        data = json.loads((output_dir / "cert.json").read_text())
        assert data["valid"] is False
        assert data["diagnostic"] == "no root bracketed"
        assert data["head_drift"] is None

    def test_certify_small_oracle(self, output_dir):
        result = invoke("certify", "--k", "2", "--trunc", "40", "--oracle-n", "4", "--out", "cert.json")
        assert result.exit_code == 0, result.output
        data = json.loads((output_dir / "cert.json").read_text())
        assert data["k"] == 2
        assert data["orders"] == [40, 80, 160]

    @pytest.mark.parametrize("args", [["--tail", "guess"], ["--oracle-n", "3"], ["--tol", "0"]])
    def test_certify_usage_errors(self, args):
        assert invoke("certify", *args).exit_code == 2


class TestOracleCommands:
    """grammar, sandwich and report"""

    def test_grammar(self, output_dir):
        result = invoke("grammar", "--k", "1", "--n-max", "4", "--out", "g.csv")
        assert result.exit_code == 0, result.output
        lines = (output_dir / "g.csv").read_text().splitlines()
        assert len(lines) == 5
        assert all(line.endswith(",true") for line in lines[1:])

    def test_grammar_limit(self):
        assert invoke("grammar", "--n-max", "9").exit_code == 2

    def test_sandwich(self, output_dir):
        result = invoke("sandwich", "--k", "1", "--n-max", "4", "--format", "json", "--out", "s.json")
        assert result.exit_code == 0, result.output
        rows = json.loads((output_dir / "s.json").read_text())
        assert [row["oracle_count"] for row in rows] == [0, 1, 1, 9]
        assert all(row["lower"] <= row["oracle_count"] <= row["upper"] for row in rows)

    @patch("app.report_components.report_generator.certify_class")
    def test_report(self, mock_certify, output_dir):
        mock_certify.return_value = SubcriticalityCertificate(
            k=1, eta=0.232, tau=0.2, rho=0.1, cdot_at_rho=0.2, margin=0.03, relative_margin=0.13, valid=True
        )
        result = invoke("report", "--k", "1", "--n-max", "4", "--trunc", "20", "--oracle-n", "4")
        assert result.exit_code == 0, result.output
        report = output_dir / "report_k1" / "report_k1.md"
        assert str(report) in result.output
        text = report.read_text()
        assert "## Resources" in text
        assert "elapsed_seconds" in text
        assert (output_dir / "report_k1" / "census.csv").exists()
