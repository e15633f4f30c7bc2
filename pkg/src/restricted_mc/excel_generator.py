"""Excel workbook output for verification runs and rate sweeps."""

from collections.abc import Mapping
from datetime import UTC, datetime
from pathlib import Path

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill
from openpyxl.utils.dataframe import dataframe_to_rows
from openpyxl.worksheet.worksheet import Worksheet

PASS_FILL = "28A745"
FAIL_FILL = "E74C3C"
HEADER_FILL = "4472C4"
MAX_SHEET_TITLE = 31


def create_workbook() -> Workbook:
    """Create and initialize workbook.

    Returns:
        New workbook instance
    """
    wb = Workbook()
    if wb.active:
        wb.remove(wb.active)
    return wb


def format_header_row(sheet: Worksheet, row_num: int = 1, color: str = HEADER_FILL) -> None:
    """Format header row with styling.

    Args:
        sheet: Worksheet to format
        row_num: Row number to format
        color: Hex color code for fill
    """
    for cell in sheet[row_num]:
        cell.font = Font(bold=True, color="FFFFFF")
        cell.fill = PatternFill(start_color=color, end_color=color, fill_type="solid")
        cell.alignment = Alignment(horizontal="center")


def auto_adjust_columns(sheet: Worksheet, max_width: int = 80) -> None:
    """Auto-adjust column widths based on content.

    Args:
        sheet: Worksheet to adjust
        max_width: Maximum column width
    """
    for column in sheet.columns:
        first_cell = column[0]
        if not hasattr(first_cell, "column_letter"):
            continue  # merged cells

        column_letter: str = first_cell.column_letter  # type: ignore[attr-defined]
        max_length = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
        sheet.column_dimensions[column_letter].width = min(max_length + 2, max_width)


def add_frame_sheet(wb: Workbook, title: str, df: pd.DataFrame, color: str = HEADER_FILL) -> Worksheet:
    """Add a sheet holding a DataFrame with a styled header.

    Args:
        wb: Workbook to add sheet to
        title: Sheet title, truncated to Excel's limit
        df: Data to write
        color: Header fill color

    Returns:
        The new worksheet
    """
    ws = wb.create_sheet(title[:MAX_SHEET_TITLE])
    for row in dataframe_to_rows(df, index=False, header=True):
        ws.append(row)
    format_header_row(ws, row_num=1, color=color)
    auto_adjust_columns(ws)
    return ws


def add_summary_sheet(wb: Workbook, summary_df: pd.DataFrame, heading: str) -> None:
    """Add summary statistics sheet.

    Args:
        wb: Workbook to add sheet to
        summary_df: DataFrame with summary statistics
        heading: Title written in the first cell
    """
    ws = wb.create_sheet("Summary")
    ws.append([heading])
    ws.append(["Generated on:", datetime.now(UTC).strftime("%Y-%m-%d %H:%M:%S")])
    ws.append([])

    for row in dataframe_to_rows(summary_df, index=False, header=True):
        ws.append(row)

    ws["A1"].font = Font(size=16, bold=True, color="FFFFFF")
    ws["A1"].fill = PatternFill(start_color=HEADER_FILL, end_color=HEADER_FILL, fill_type="solid")
    format_header_row(ws, row_num=4)
    auto_adjust_columns(ws)


def _color_status_cells(ws: Worksheet, column: int) -> None:
    """Fill status cells green or red."""
    for row in ws.iter_rows(min_row=2, min_col=column, max_col=column):
        cell = row[0]
        color = PASS_FILL if cell.value == "[PASS]" else FAIL_FILL
        cell.font = Font(bold=True, color=color)


def generate_verification_workbook(
    output_file: str | Path,
    checks_df: pd.DataFrame,
    summary_df: pd.DataFrame,
    tables: Mapping[str, pd.DataFrame] | None = None,
) -> Path:
    """Write checks, their summary and any suite tables to a workbook.

    Args:
        output_file: Path to output Excel file
        checks_df: One row per check
        summary_df: Per-suite pass/fail counts
        tables: Extra tables keyed by sheet title

    Returns:
        Path to the written workbook
    """
    print("\nGenerating Excel workbook...")
    output_path = Path(output_file)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    wb = create_workbook()
    add_summary_sheet(wb, summary_df, "Restricted Monte Carlo Verification")
    ws = add_frame_sheet(wb, "Checks", checks_df)
    if "status" in checks_df.columns:
        _color_status_cells(ws, list(checks_df.columns).index("status") + 1)
    failures = checks_df[~checks_df["passed"].astype(bool)] if "passed" in checks_df.columns else checks_df.iloc[0:0]
    if len(failures) > 0:
        add_frame_sheet(wb, "Failures", failures, color=FAIL_FILL)
    for title, table in (tables or {}).items():
        add_frame_sheet(wb, title, table, color=PASS_FILL)

    wb.save(str(output_path))
    print(f"[SUCCESS] Workbook written: {output_path}")
    return output_path


def generate_rates_workbook(output_file: str | Path, sweep_df: pd.DataFrame, slope: float | None) -> Path:
    """Write a rate sweep and its fitted slope to a workbook.

    Args:
        output_file: Path to output Excel file
        sweep_df: Sweep table
        slope: Fitted log-log slope

    Returns:
        Path to the written workbook
    """
    print("\nGenerating Excel workbook...")
    output_path = Path(output_file)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    wb = create_workbook()
    summary = pd.DataFrame(
        {
            "Metric": ["Sweep points", "Seeds per point", "Fitted log-log slope"],
            "Value": [
                len(sweep_df),
                int(sweep_df["seeds"].iloc[0]) if len(sweep_df) else 0,
                "n/a" if slope is None else round(slope, 4),
            ],
        }
    )
    add_summary_sheet(wb, summary, "Bit Budget Sweep")
    add_frame_sheet(wb, "Sweep", sweep_df)

    wb.save(str(output_path))
    print(f"[SUCCESS] Workbook written: {output_path}")
    return output_path
