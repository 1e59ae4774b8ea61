"""Tests for the mst command line."""

import json

import pytest
from typer.testing import CliRunner

from mstree.cli import app
from tests.conftest import FIGURE_ONE

runner = CliRunner()


def run(*args: str):
    return runner.invoke(app, list(args))


@pytest.fixture
def figure_one_file(tmp_path):
    path = tmp_path / "figure_one.txt"
    path.write_text("\n".join(str(r) for r in FIGURE_ONE) + "\n")
    return path


@pytest.fixture
def figure_one_cmst(tmp_path, figure_one_file):
    out = tmp_path / "figure_one.cmst"
    result = run("compress", "build", str(figure_one_file), "--m", "4", "-o", str(out))
    assert result.exit_code == 0
    return out


class TestSpectra:
    def test_regime_flip(self):
        result = run("spectra", "--m-min", "26", "--m-max", "27", "--format", "json")
        assert result.exit_code == 0
        rows = json.loads(result.stdout)
        assert [(r["m"], r["regime"]) for r in rows] == [
            (26, "Gaussian"),
            (27, "NonGaussian"),
        ]
        assert rows[0]["lambda2_re"] == pytest.approx(0.499, abs=1e-3)
        assert rows[1]["lambda2_re"] == pytest.approx(0.516, abs=1e-3)

    def test_text_table(self):
        result = run("spectra", "--m-min", "2", "--m-max", "4")
        assert result.exit_code == 0
        assert "-2.000" in result.stdout

    @pytest.mark.parametrize(
        "args", [("--m-min", "10", "--m-max", "5"), ("--m-max", "65")]
    )
    def test_bad_range(self, args):
        assert run("spectra", *args).exit_code == 2


class TestLimits:
    def test_json(self):
        result = run("limits", "--m", "4", "--format", "json")
        assert result.exit_code == 0
        record = json.loads(result.stdout)
        assert record["leaf_fraction"] == pytest.approx(36 / 130)
        assert record["protected_fraction"] == pytest.approx(12 / 65)
        assert len(record["v"]) == 6
        assert "note" in record

    def test_rejects_m_one(self):
        assert run("limits", "--m", "1").exit_code == 2


class TestSimulate:
    def test_same_flags_same_bytes(self):
        args = ("simulate", "--m", "3", "--n", "300", "--trials", "2", "--seed", "5")
        first = run(*args, "--format", "json")
        second = run(*args, "--format", "json")
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert json.loads(first.stdout)["trials"] == 2

    def test_csv(self):
        result = run(
            "simulate", "--m", "3", "--n", "100", "--trials", "1", "--format", "csv"
        )
        assert result.exit_code == 0
        header = result.stdout.splitlines()[0]
        assert "mean_gap_fractions[3]" in header

    def test_rejects_zero_n(self):
        assert run("simulate", "--m", "3", "--n", "0").exit_code == 2

    def test_rejects_bad_format(self):
        assert run("simulate", "--m", "3", "--format", "xml").exit_code == 2


class TestTables:
    def test_relsize_csv(self):
        result = run("tables", "--which", "relsize", "--format", "csv")
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "m,relative_size"
        assert lines[1].startswith("2,")
        assert float(lines[1].split(",")[1]) == pytest.approx(0.778, abs=1e-3)
        assert float(lines[-1].split(",")[1]) == pytest.approx(0.134, abs=1e-3)

    def test_lambda2_json(self):
        result = run("tables", "--which", "lambda2", "--format", "json")
        rows = json.loads(result.stdout)
        assert len(rows) == 26
        assert rows[12]["m"] == 14
        assert rows[12]["lambda2_re"] == pytest.approx(0.040, abs=1e-3)

    def test_unknown_table(self):
        assert run("tables", "--which", "bogus").exit_code == 2


class TestUrnCommands:
    def test_urn(self):
        result = run("urn", "--m", "4", "--steps", "100", "--format", "json")
        assert result.exit_code == 0
        assert json.loads(result.stdout)["total"] == 102

    def test_couple(self):
        result = run("couple", "--m", "4", "--steps", "300", "--format", "json")
        assert result.exit_code == 0
        record = json.loads(result.stdout)
        assert record["coupled"] is True
        assert record["gap_profile"] == record["urn_counts"]

    def test_clt(self):
        result = run(
            "clt", "--m", "4", "--n", "200", "--trials", "5", "--format", "json"
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)["moments_available"] is True

    def test_clt_outside_gaussian_range(self):
        assert run("clt", "--m", "30", "--n", "10", "--trials", "2").exit_code == 2


class TestCompress:
    def test_build_reports_sizes(self, tmp_path, figure_one_file):
        out = tmp_path / "tree.cmst"
        result = run(
            "compress", "build", str(figure_one_file),
            "--m", "4", "-o", str(out), "--format", "json",
        )
        assert result.exit_code == 0
        record = json.loads(result.stdout)
        assert record["payload_bytes"] == 96
        assert record["formula_bytes"] == 96
        assert record["plain_bytes"] == 196
        assert record["ratio"] == pytest.approx(0.4898, abs=1e-4)
        assert out.stat().st_size == 120

    def test_build_random(self, tmp_path):
        out = tmp_path / "random.cmst"
        result = run(
            "compress", "build", "--random-n", "500", "--m", "5", "-o", str(out),
            "--format", "json",
        )
        assert result.exit_code == 0
        record = json.loads(result.stdout)
        assert record["payload_bytes"] == record["formula_bytes"]

    def test_build_needs_one_input(self, tmp_path, figure_one_file):
        out = str(tmp_path / "x.cmst")
        assert run("compress", "build", "--m", "4", "-o", out).exit_code == 2
        both = run(
            "compress", "build", str(figure_one_file),
            "--random-n", "5", "--m", "4", "-o", out,
        )
        assert both.exit_code == 2

    def test_key_overflow_is_usage_error(self, tmp_path):
        result = run(
            "compress", "build", "--random-n", "500", "--m", "5",
            "--k", "1", "-o", str(tmp_path / "x.cmst"),
        )
        assert result.exit_code == 2

    def test_oversized_m_is_usage_error(self, tmp_path):
        result = run(
            "compress", "build", "--random-n", "10", "--m", "70000",
            "-o", str(tmp_path / "x.cmst"),
        )
        assert result.exit_code == 2
        assert not (tmp_path / "x.cmst").exists()

    @pytest.mark.parametrize("text", ["1\nx\n", "1\n2\n1\n", "0\n"])
    def test_bad_permutation_file(self, tmp_path, text):
        source = tmp_path / "bad.txt"
        source.write_text(text)
        result = run(
            "compress", "build", str(source), "--m", "3",
            "-o", str(tmp_path / "x.cmst"),
        )
        assert result.exit_code == 3

    def test_inspect(self, figure_one_cmst):
        result = run("compress", "inspect", str(figure_one_cmst), "--format", "json")
        assert result.exit_code == 0
        record = json.loads(result.stdout)
        assert record["type_counts"] == {"2": 1, "4": 2, "5": 2, "6": 1, "7": 1}
        assert record["total"] == 96
        assert record["nodes"] == 7

    def test_inspect_corrupt_file(self, tmp_path, figure_one_cmst):
        broken = tmp_path / "broken.cmst"
        broken.write_bytes(b"XMST" + figure_one_cmst.read_bytes()[4:])
        assert run("compress", "inspect", str(broken)).exit_code == 3

    def test_get(self, figure_one_cmst):
        found = run("compress", "get", str(figure_one_cmst), "--key", "8")
        assert found.exit_code == 0
        assert found.stdout.strip() == "8: found"
        missing = run("compress", "get", str(figure_one_cmst), "--key", "17")
        assert missing.exit_code == 1
        assert missing.stdout.strip() == "17: not found"

    def test_get_truncated_file(self, tmp_path, figure_one_cmst):
        broken = tmp_path / "short.cmst"
        broken.write_bytes(figure_one_cmst.read_bytes()[:-2])
        assert run("compress", "get", str(broken), "--key", "15").exit_code == 3
