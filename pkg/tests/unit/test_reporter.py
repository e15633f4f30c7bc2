"""Unit tests for reporter module."""

from io import StringIO
from unittest.mock import patch

import pandas as pd

from restricted_mc.models import CheckResult
from restricted_mc.reporter import (
    CHECK_COLUMNS,
    checks_to_frame,
    failed_checks,
    generate_summary_statistics,
    print_rates_summary,
    print_summary,
)


def make_check(suite: str, check: str, passed: bool) -> CheckResult:
    """Build a check record."""
    return CheckResult(
        suite=suite,
        check=check,
        subject="coin",
        passed=passed,
        status="[PASS]" if passed else "[FAIL]",
        witness="" if passed else "error 1/2 > 1/4",
    )


class TestChecksToFrame:
    """Tests for checks_to_frame function."""

    def test_columns(self) -> None:
        """Test one row per check with fixed columns."""
        df = checks_to_frame([make_check("lemma1", "cap_hard", True), make_check("markov", "markov_bound", False)])

        assert list(df.columns) == CHECK_COLUMNS
        assert len(df) == 2

    def test_empty(self) -> None:
        """Test an empty check list keeps the columns."""
        df = checks_to_frame([])

        assert list(df.columns) == CHECK_COLUMNS
        assert len(df) == 0


class TestGenerateSummaryStatistics:
    """Tests for generate_summary_statistics function."""

    def test_counts_per_suite(self) -> None:
        """Test per-suite counts and the total row."""
        df = checks_to_frame(
            [
                make_check("lemma1", "a", True),
                make_check("lemma1", "b", False),
                make_check("oracle", "c", True),
            ]
        )

        summary = generate_summary_statistics(df)

        assert summary["Suite"].tolist() == ["lemma1", "oracle", "Total"]
        assert summary["Passed"].tolist() == [1, 1, 2]
        assert summary["Failed"].tolist() == [1, 0, 1]
        assert summary.iloc[-1]["Checks"] == 3

    def test_empty_dataframe(self) -> None:
        """Test an empty frame yields only the total row."""
        summary = generate_summary_statistics(checks_to_frame([]))

        assert isinstance(summary, pd.DataFrame)
        assert summary["Suite"].tolist() == ["Total"]
        assert summary.iloc[0]["Checks"] == 0

    def test_failed_checks(self) -> None:
        """Test failures are selected."""
        df = checks_to_frame([make_check("engine", "a", True), make_check("engine", "b", False)])

        assert failed_checks(df)["check"].tolist() == ["b"]


class TestPrintSummary:
    """Tests for print_summary and print_rates_summary."""

    def test_all_passed(self) -> None:
        """Test the success line and the output file are shown."""
        df = checks_to_frame([make_check("bounds", "calculator", True)])

        with patch("sys.stdout", new=StringIO()) as fake_out:
            print_summary(df, output_file="report.json")
            output = fake_out.getvalue()

        assert "report.json" in output
        assert "bounds: 1/1 passed" in output
        assert "[OK] All checks passed" in output

    def test_failures_listed(self) -> None:
        """Test failed checks are listed with their witness."""
        df = checks_to_frame([make_check("markov", "markov_bound", False)])

        with patch("sys.stdout", new=StringIO()) as fake_out:
            print_summary(df)
            output = fake_out.getvalue()

        assert "[FAIL] 1 check(s) failed" in output
        assert "markov/markov_bound - coin: error 1/2 > 1/4" in output

    def test_rates_summary(self) -> None:
        """Test sweep rows and the fitted slope are shown."""
        frame = pd.DataFrame(
            [{"n_cells": 8, "bits_per_cell": 3, "total_bits": 24, "mean_error": 0.01, "stderr": 0.001, "seeds": 10}]
        )

        with patch("sys.stdout", new=StringIO()) as fake_out:
            print_rates_summary(frame, -1.5, output_file="rates.csv")
            output = fake_out.getvalue()

        assert "rates.csv" in output
        assert "n=    8" in output
        assert "Fitted log-log slope: -1.500" in output

    def test_rates_summary_without_slope(self) -> None:
        """Test a warning when no slope could be fitted."""
        frame = pd.DataFrame(
            [{"n_cells": 8, "bits_per_cell": 3, "total_bits": 24, "mean_error": 0.0, "stderr": 0.0, "seeds": 10}]
        )

        with patch("sys.stdout", new=StringIO()) as fake_out:
            print_rates_summary(frame, None)
            output = fake_out.getvalue()

        assert "[WARN]" in output
