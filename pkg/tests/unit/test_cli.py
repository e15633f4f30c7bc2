"""Unit tests for cli module."""

import json
import os
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import pandas as pd
import pytest

from restricted_mc.cli import main, parse_args


class TestParseArgs:
    """Tests for parse_args function."""

    def test_subcommand_and_flags(self) -> None:
        """Test flags are parsed and repeated params collected."""
        args = parse_args(["bounds", "--bound", "cor2", "--n", "64", "--param", "c0=1", "--param", "sigma=1/2"])

        assert args.subcommand == "bounds"
        assert args.n == "64"
        assert args.param == ["c0=1", "sigma=1/2"]

    def test_unknown_subcommand(self) -> None:
        """Test unknown subcommands exit through argparse."""
        with patch("sys.stderr", new=StringIO()), pytest.raises(SystemExit):
            parse_args(["integrate"])


class TestBoundsCommand:
    """Tests for the bounds subcommand."""

    def test_kappa(self) -> None:
        """Test the kappa calculator prints its JSON result."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["bounds", "--bound", "kappa", "--n", "16"])
            result = json.loads(fake_out.getvalue())

        assert exit_code == 0
        assert result["value"] == 8
        assert result["bound"] == "kappa"

    def test_thm1_to_file(self, tmp_path: Path) -> None:
        """Test the cardinality calculator writes to --out."""
        out = tmp_path / "thm1.json"
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(["bounds", "--bound", "thm1", "--n", "2", "--k", "1", "--out", str(out)])

        assert exit_code == 0
        assert json.loads(out.read_text(encoding="utf-8"))["value"] == 48

    def test_missing_bound(self) -> None:
        """Test bounds without --bound fails."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["bounds", "--n", "16"])

        assert exit_code == 1
        assert "bounds needs --bound" in fake_out.getvalue()

    def test_malformed_param(self) -> None:
        """Test parameters without '=' fail."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["bounds", "--bound", "kappa", "--param", "n16"])

        assert exit_code == 1
        assert "KEY=VALUE" in fake_out.getvalue()


class TestVerifyCommand:
    """Tests for the verify subcommand."""

    def test_oracle_report(self, tmp_path: Path) -> None:
        """Test a passing suite writes its report and exits 0."""
        out = tmp_path / "report.json"
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(["verify", "--suite", "oracle", "--out", str(out)])

        report = json.loads(out.read_text(encoding="utf-8"))
        assert exit_code == 0
        assert report["passed"]
        assert len(report["checks"]) == 8

    def test_unknown_suite(self) -> None:
        """Test an unknown suite exits 1 with a suggestion."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["verify", "--suite", "lemma3"])

        assert exit_code == 1
        assert "Unknown suite 'lemma3'" in fake_out.getvalue()

    def test_error_reports_and_branches(self, tmp_path: Path) -> None:
        """Test verify writes each member's error report and an optional branch table."""
        out = tmp_path / "report.json"
        branches = tmp_path / "branches.csv"
        argv = [
            "verify",
            "--suite",
            "lemma1",
            "--strategy",
            "bit_then_query",
            "--out",
            str(out),
            "--branches-csv",
            str(branches),
        ]
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(argv)

        report = json.loads(out.read_text(encoding="utf-8"))
        error_report = report["error_reports"]["bit_then_query"]
        frame = pd.read_csv(branches)
        assert exit_code == 0
        assert list(report["error_reports"]) == ["bit_then_query"]
        assert error_report["mode"] == "exact-enumeration"
        assert len(error_report["per_input"]) == 4
        assert list(frame.columns[:2]) == ["input", "branch_id"]
        assert len(frame) == 8
        assert all(label.startswith("bit_then_query:") for label in frame["input"])


class TestDerandomizeCommand:
    """Tests for the derandomize subcommand."""

    def test_coin_tree(self, tmp_path: Path) -> None:
        """Test the coin derandomizes to the constant tree 0."""
        out = tmp_path / "coin.json"
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(["derandomize", "--strategy", "coin", "--out", str(out)])

        document = json.loads(out.read_text(encoding="utf-8"))
        report = json.loads((tmp_path / "coin.report.json").read_text(encoding="utf-8"))
        assert exit_code == 0
        assert document["tree"]["kind"] == "stop"
        assert document["tree"]["output"] == 0
        assert document["source"] == "coin"
        assert report["passed"]

    def test_midpoint_on_lipschitz_family(self, tmp_path: Path) -> None:
        """Test deterministic rules on a Lipschitz family write a symbolic log."""
        family = tmp_path / "family.json"
        family.write_text(json.dumps({"members": [{"family": "sawtooth", "n": 2}]}), encoding="utf-8")
        out = tmp_path / "midpoint.json"
        argv = [
            "derandomize",
            "--strategy",
            "midpoint",
            "--param",
            "n=2",
            "--problem",
            "lipschitz",
            "--family",
            str(family),
            "--out",
            str(out),
        ]
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(argv)

        log = json.loads(out.read_text(encoding="utf-8"))
        assert exit_code == 0
        assert log["mode"] == "symbolic"
        assert log["cost_bound"] == 2

    def test_missing_strategy(self) -> None:
        """Test derandomize without --strategy fails."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["derandomize"])

        assert exit_code == 1
        assert "needs --strategy" in fake_out.getvalue()

    def test_report_carries_error_report_and_branches(self, tmp_path: Path) -> None:
        """Test the sidecar holds the source strategy's error report and branches are dumped."""
        out = tmp_path / "bit_then_query.json"
        branches = tmp_path / "branches.csv"
        argv = ["derandomize", "--strategy", "bit_then_query", "--out", str(out), "--branches-csv", str(branches)]
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(argv)

        report = json.loads((tmp_path / "bit_then_query.report.json").read_text(encoding="utf-8"))
        frame = pd.read_csv(branches)
        assert exit_code == 0
        assert report["error_report"]["mode"] == "exact-enumeration"
        labels = [row["input"] for row in report["per_input"]]
        assert [row["input"] for row in report["error_report"]["per_input"]] == labels
        assert set(frame["input"]) == set(labels)
        assert set(frame["card_info"]) == {1}

    def test_suite_member_rejects_foreign_restriction(self) -> None:
        """Test a suite member cannot be paired with a different restriction."""
        argv = ["derandomize", "--strategy", "bit_then_query", "--restriction", '{"alphabet": [0, 1, 2]}']
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(argv)

        assert exit_code == 1
        assert "cannot replace it" in fake_out.getvalue()

    def test_suite_member_accepts_its_own_restriction(self, tmp_path: Path) -> None:
        """Test naming the member's own restriction is accepted."""
        out = tmp_path / "coin.json"
        argv = ["derandomize", "--strategy", "coin", "--restriction", "bit", "--out", str(out)]
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(argv)

        assert exit_code == 0
        assert out.exists()

    def test_tree_file_is_replayed_before_use(self, tmp_path: Path) -> None:
        """Test a decision-tree file querying outside the grid is rejected."""
        tree = tmp_path / "bad_tree.json"
        tree.write_text(
            json.dumps({"kind": "info", "query": 5, "children": {"-1": {"kind": "stop", "output": 0}}}),
            encoding="utf-8",
        )
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["derandomize", "--strategy", str(tree), "--m", "2"])

        assert exit_code == 1
        assert "not well formed" in fake_out.getvalue()


class TestRatesCommand:
    """Tests for the rates subcommand."""

    def test_small_sweep(self, tmp_path: Path) -> None:
        """Test a short sweep writes the CSV and the slope sidecar."""
        out = tmp_path / "rates.csv"
        argv = ["rates", "--n", "2,4", "--bits", "1", "--seeds", "0:3", "--out", str(out)]
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()):
            exit_code = main(argv)

        sidecar = json.loads((tmp_path / "rates.slope.json").read_text(encoding="utf-8"))
        assert exit_code == 0
        assert out.exists()
        assert sidecar["n_values"] == [2, 4]
        assert sidecar["seeds"] == 3

    def test_grid_problem_is_rejected(self) -> None:
        """Test rates refuses the grid problem."""
        with patch.dict(os.environ, {}, clear=True), patch("sys.stdout", new=StringIO()) as fake_out:
            exit_code = main(["rates", "--problem", "grid", "--n", "2", "--bits", "1", "--seeds", "0:2"])

        assert exit_code == 1
        assert "--problem grid is not supported" in fake_out.getvalue()
