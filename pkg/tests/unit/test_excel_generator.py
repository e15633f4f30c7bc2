"""Unit tests for excel_generator module."""

from pathlib import Path

import pandas as pd
from openpyxl import load_workbook

from restricted_mc.excel_generator import generate_rates_workbook, generate_verification_workbook
from restricted_mc.models import CheckResult
from restricted_mc.reporter import checks_to_frame, generate_summary_statistics


def make_check(suite: str, check: str, passed: bool, witness: str = "") -> CheckResult:
    """Build a check record."""
    status = "[PASS]" if passed else "[FAIL]"
    return CheckResult(suite=suite, check=check, subject="coin", passed=passed, status=status, witness=witness)


class TestGenerateVerificationWorkbook:
    """Tests for generate_verification_workbook function."""

    def test_sheets(self, tmp_path: Path) -> None:
        """Test summary, checks, failures and table sheets are written."""
        checks = checks_to_frame(
            [
                make_check("oracle", "grid_closed_form", True),
                make_check("markov", "markov_bound", False, "1/2 > 1/3"),
            ]
        )
        table = pd.DataFrame({"n": [1], "k": [0], "bound": ["29/96"]})

        path = generate_verification_workbook(
            tmp_path / "out" / "verify.xlsx", checks, generate_summary_statistics(checks), {"theorem1": table}
        )

        wb = load_workbook(path)
        assert wb.sheetnames == ["Summary", "Checks", "Failures", "theorem1"]
        assert wb["Checks"]["A1"].value == "suite"
        assert wb["Failures"].max_row == 2

    def test_no_failures_sheet_when_all_pass(self, tmp_path: Path) -> None:
        """Test the failures sheet is omitted when everything passed."""
        checks = checks_to_frame([make_check("bounds", "calculator", True)])

        path = generate_verification_workbook(tmp_path / "verify.xlsx", checks, generate_summary_statistics(checks))

        assert load_workbook(path).sheetnames == ["Summary", "Checks"]


class TestGenerateRatesWorkbook:
    """Tests for generate_rates_workbook function."""

    def test_sheets(self, tmp_path: Path) -> None:
        """Test the sweep workbook layout."""
        sweep = pd.DataFrame(
            [{"n_cells": 8, "bits_per_cell": 3, "total_bits": 24, "mean_error": 0.01, "stderr": 0.001, "seeds": 10}]
        )

        path = generate_rates_workbook(tmp_path / "rates.xlsx", sweep, -1.5)

        wb = load_workbook(path)
        assert wb.sheetnames == ["Summary", "Sweep"]
        assert wb["Sweep"]["A2"].value == 8
