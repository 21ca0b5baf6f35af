"""Plain tabular results handed to export and to the interface layer."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ResultTable:
    columns: tuple
    rows: tuple  # of tuples

    def to_record(self):
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}
