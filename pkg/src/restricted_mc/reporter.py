"""Summary statistics and reporting functions."""

from collections.abc import Sequence

import pandas as pd

from restricted_mc.models import CheckResult

CHECK_COLUMNS = ["suite", "check", "subject", "passed", "status", "witness"]


def checks_to_frame(checks: Sequence[CheckResult]) -> pd.DataFrame:
    """Tabulate check records.

    Args:
        checks: Check records from one or more suites

    Returns:
        DataFrame with one row per check
    """
    return pd.DataFrame([dict(check) for check in checks], columns=CHECK_COLUMNS)


def generate_summary_statistics(df: pd.DataFrame) -> pd.DataFrame:
    """Generate per-suite pass/fail counts from a checks DataFrame.

    Args:
        df: Checks DataFrame

    Returns:
        DataFrame with columns Suite, Checks, Passed, Failed; the last row totals all suites
    """
    rows: list[dict[str, object]] = []
    for suite, group in df.groupby("suite", sort=False):
        passed = int(group["passed"].sum())
        rows.append({"Suite": suite, "Checks": len(group), "Passed": passed, "Failed": len(group) - passed})

    total_passed = int(df["passed"].sum()) if len(df) else 0
    rows.append({"Suite": "Total", "Checks": len(df), "Passed": total_passed, "Failed": len(df) - total_passed})
    return pd.DataFrame(rows, columns=["Suite", "Checks", "Passed", "Failed"])


def failed_checks(df: pd.DataFrame) -> pd.DataFrame:
    """Rows of checks that failed."""
    return df[~df["passed"].astype(bool)]


def print_summary(df: pd.DataFrame, output_file: str | None = None) -> None:
    """Print verification summary to console.

    Args:
        df: Checks DataFrame
        output_file: Output file path, if results were written
    """
    summary = generate_summary_statistics(df)
    failures = failed_checks(df)

    if output_file:
        print(f"\n[SUCCESS] Results written: {output_file}")
    print("\nSummary:")
    for row in summary.itertuples(index=False):
        print(f"  {row.Suite}: {row.Passed}/{row.Checks} passed")
    if len(failures) > 0:
        print(f"\n[FAIL] {len(failures)} check(s) failed:")
        for row in failures.itertuples(index=False):
            print(f"  {row.suite}/{row.check} - {row.subject}: {row.witness}")
    else:
        print("\n[OK] All checks passed")


def print_rates_summary(frame: pd.DataFrame, slope: float | None, output_file: str | None = None) -> None:
    """Print a rate sweep and its fitted slope.

    Args:
        frame: Sweep table
        slope: Fitted log-log slope, or None if it could not be fitted
        output_file: CSV path, if written
    """
    if output_file:
        print(f"\n[SUCCESS] Sweep written: {output_file}")
    print("\nSweep:")
    for row in frame.itertuples(index=False):
        print(
            f"  n={row.n_cells:>5}  b={row.bits_per_cell:>2}  bits={row.total_bits:>6}  "
            f"error={row.mean_error:.4e} ± {row.stderr:.1e}"
        )
    if slope is None:
        print("\n[WARN] Not enough positive errors to fit a slope")
    else:
        print(f"\n  Fitted log-log slope: {slope:.3f}")
