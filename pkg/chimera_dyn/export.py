"""Stable file output: rounded JSON and styled Excel workbooks."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Mapping, Union

import pandas as pd

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def round_floats(data: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(data, float):
        if not math.isfinite(data):
            return data
        return float(f"{data:.{digits}g}")
    if isinstance(data, Mapping):
        return {str(k): round_floats(v, digits) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [round_floats(v, digits) for v in data]
    return data


def dump_json(data: Any, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(round_floats(data), f, indent=2, sort_keys=False)
        f.write("\n")


def export_workbook(sheets: Mapping[str, pd.DataFrame], path: Union[str, Path]) -> None:
    """Write each frame to its own sheet with a bold, frozen header row."""
    from openpyxl import load_workbook
    from openpyxl.styles import Border, Font, PatternFill, Side
    from openpyxl.utils import get_column_letter

    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        for name, frame in sheets.items():
            frame.to_excel(writer, sheet_name=name[:31], index=False)

    wb = load_workbook(path)
    bold = Font(bold=True)
    header_fill = PatternFill(start_color="D9D9D9", end_color="D9D9D9", fill_type="solid")
    thin = Side(style="thin", color="000000")
    border = Border(left=thin, right=thin, top=thin, bottom=thin)
    for ws in wb.worksheets:
        ws.freeze_panes = "A2"
        ws.auto_filter.ref = ws.dimensions
        for cell in ws[1]:
            cell.font = bold
            cell.fill = header_fill
            cell.border = border
        for idx, column in enumerate(ws.iter_cols(min_row=1, max_row=1), start=1):
            width = max(len(str(column[0].value or "")), 10)
            ws.column_dimensions[get_column_letter(idx)].width = width + 2
    wb.save(path)
    logger.info("Exported %d sheets to %s", len(sheets), path)
