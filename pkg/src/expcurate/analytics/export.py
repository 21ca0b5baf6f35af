"""Result export: CSV with a header row, or canonical JSON bytes."""

from __future__ import annotations

import csv
import io

from expcurate.errors import UnknownFormat
from expcurate.metamodel import canonical_encode, format_decimal
from expcurate.analytics.tables import ResultTable

FORMATS = ("csv", "json")


def _cell_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_decimal(value)
    return str(value)


def _as_table(result) -> ResultTable:
    if isinstance(result, ResultTable):
        return result
    if isinstance(result, dict):
        return ResultTable(
            columns=("key", "value"),
            rows=tuple((k, result[k]) for k in result),
        )
    if isinstance(result, (list, tuple)) and all(isinstance(r, dict) for r in result):
        columns = []
        for row in result:
            for key in row:
                if key not in columns:
                    columns.append(key)
        return ResultTable(
            columns=tuple(columns),
            rows=tuple(tuple(row.get(c, "") for c in columns) for row in result),
        )
    raise UnknownFormat(f"result of type {type(result).__name__} is not exportable")


def export_results(result, format: str) -> bytes:
    """Serialize a result; the first CSV line is the column names."""
    if format == "json":
        payload = result.to_record() if hasattr(result, "to_record") else result
        return canonical_encode(payload)
    if format == "csv":
        table = _as_table(result)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell_text(v) for v in row])
        return buf.getvalue().encode("utf-8")
    raise UnknownFormat(format)
