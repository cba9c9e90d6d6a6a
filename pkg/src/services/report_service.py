"""Tabular outputs: metric tables, model comparisons and sweep curves.

CSV and JSON go through pandas and pydantic; the comparison can also be
rendered as an .xlsx workbook with one row per model and one column per
(metric, R) pair.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from io import BytesIO
from pathlib import Path

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill
from openpyxl.worksheet.worksheet import Worksheet

from ..core.logging_config import get_logger
from ..schemas.evaluation import CompareRow, MetricTable, SweepRow

logger = get_logger(__name__)

METRIC_COLUMNS = ["metric", "R", "mean", "n_users"]
USER_COLUMNS = ["user", "metric", "R", "value"]
COMPARE_COLUMNS = ["model", "metric", "R", "mean", "n_users"]
SWEEP_COLUMNS = ["param_value", "metric", "R", "mean"]

_TITLE_FONT = Font(bold=True, size=14)
_LABEL_FONT = Font(bold=True)
_HEADER_FONT = Font(bold=True, color="FFFFFF")
_HEADER_FILL = PatternFill("solid", fgColor="2E7D32")

_DISPLAY = {"recall": "Recall", "ndcg": "NDCG", "dcg": "DCG"}


def metric_frame(table: MetricTable) -> pd.DataFrame:
    return pd.DataFrame(
        [row.model_dump() for row in table.rows], columns=METRIC_COLUMNS
    )


def render_table(table: MetricTable) -> str:
    """CSV text of the aggregated table, as printed on stdout."""
    return metric_frame(table).to_csv(index=False)


def write_metric_table(table: MetricTable, out: Path) -> list[Path]:
    """``<out>.csv`` and ``<out>.json``, plus ``<out>_per_user.csv`` if present."""
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_suffix(".csv")
    json_path = out.with_suffix(".json")
    metric_frame(table).to_csv(csv_path, index=False)
    json_path.write_text(table.model_dump_json(indent=2) + "\n", encoding="utf-8")
    written = [csv_path, json_path]
    if table.per_user is not None:
        user_path = out.with_name(f"{out.stem}_per_user.csv")
        pd.DataFrame(
            [row.model_dump() for row in table.per_user], columns=USER_COLUMNS
        ).to_csv(user_path, index=False)
        written.append(user_path)
    logger.info("metric_table_written", paths=[str(p) for p in written])
    return written


# -- comparison ---------------------------------------------------------------


def compare_rows(tables: Mapping[str, MetricTable]) -> list[CompareRow]:
    """One row per model per (metric, R), models in the given order."""
    return [
        CompareRow(
            model=name,
            metric=row.metric,
            R=row.R,
            mean=row.mean,
            n_users=row.n_users,
        )
        for name, table in tables.items()
        for row in table.rows
    ]


def compare_frame(rows: Iterable[CompareRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=COMPARE_COLUMNS)


def _pivot(rows: list[CompareRow]) -> tuple[list[str], list[tuple[str, int]]]:
    models = list(dict.fromkeys(row.model for row in rows))
    keys = sorted(
        {(row.metric, row.R) for row in rows}, key=lambda k: (k[0] != "recall", k)
    )
    return models, keys


def _header(ws: Worksheet, row: int, labels: list[str]) -> None:
    for col, label in enumerate(labels, start=1):
        cell = ws.cell(row=row, column=col, value=label)
        cell.font = _HEADER_FONT
        cell.fill = _HEADER_FILL
        cell.alignment = Alignment(horizontal="center")


def build_compare_xlsx(
    rows: list[CompareRow], title: str = "Model comparison"
) -> bytes:
    """Workbook with the comparison in table layout; returns its bytes."""
    wb = Workbook()
    ws = wb.active
    assert ws is not None
    ws.title = "Comparison"
    models, keys = _pivot(rows)
    ws.column_dimensions["A"].width = 24
    ws.cell(row=1, column=1, value=title).font = _TITLE_FONT

    labels = [f"{_DISPLAY[m]}@{r}" for m, r in keys]
    _header(ws, 3, ["Model", *labels, "Users"])
    means = {(row.model, row.metric, row.R): row.mean for row in rows}
    users = {row.model: row.n_users for row in rows}
    for offset, model in enumerate(models):
        line = 4 + offset
        ws.cell(row=line, column=1, value=model).font = _LABEL_FONT
        for col, (metric, r) in enumerate(keys, start=2):
            cell = ws.cell(row=line, column=col, value=means.get((model, metric, r)))
            cell.number_format = "0.000"
        ws.cell(row=line, column=len(keys) + 2, value=users[model])

    buffer = BytesIO()
    wb.save(buffer)
    return buffer.getvalue()


def write_compare(
    rows: list[CompareRow], csv_path: Path | None = None, xlsx_path: Path | None = None
) -> str:
    """CSV text of the comparison; optionally also written to disk."""
    text = compare_frame(rows).to_csv(index=False)
    if csv_path is not None:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(text, encoding="utf-8")
    if xlsx_path is not None:
        xlsx_path.parent.mkdir(parents=True, exist_ok=True)
        xlsx_path.write_bytes(build_compare_xlsx(rows))
        logger.info("compare_workbook_written", path=str(xlsx_path))
    return text


# -- sweeps -------------------------------------------------------------------


def sweep_rows(param_value: float, table: MetricTable) -> list[SweepRow]:
    return [
        SweepRow(param_value=param_value, metric=row.metric, R=row.R, mean=row.mean)
        for row in table.rows
    ]


def sweep_frame(rows: Iterable[SweepRow]) -> pd.DataFrame:
    """Long format, ordered by parameter value then table order."""
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=SWEEP_COLUMNS)
    return frame.sort_values("param_value", kind="stable").reset_index(drop=True)
