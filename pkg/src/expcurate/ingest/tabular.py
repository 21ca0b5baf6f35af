"""Tabular extraction and cleaning: RFC-4180-style CSV in, staged tables out."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from expcurate.errors import EmptySource, RaggedRow, UnknownColumn
from expcurate.metamodel import canonical_encode, decode_canonical


@dataclass(frozen=True)
class StagedTable:
    header: tuple
    rows: tuple  # of tuple[str, ...]
    source_uri: str = ""

    def column_index(self, name: str) -> int:
        try:
            return self.header.index(name)
        except ValueError:
            raise UnknownColumn(name)

    def column(self, name: str):
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]


@dataclass(frozen=True)
class DedupeReport:
    removed: int
    kept: int


def extract_tabular(source, delimiter=",", quote='"', source_uri="") -> StagedTable:
    """Parse CSV bytes or a path; header comes from the first row."""
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    else:
        source_uri = source_uri or str(source)
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text), delimiter=delimiter, quotechar=quote)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptySource(source_uri or "<bytes>")
    if not any(cell.strip() for cell in header):
        raise EmptySource(source_uri or "<bytes>")
    rows = []
    for i, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedRow(i)
        rows.append(tuple(row))
    return StagedTable(header=tuple(header), rows=tuple(rows), source_uri=source_uri)


def table_to_payload(table: StagedTable) -> bytes:
    """Canonical byte encoding of a table; the payload stored for tabular releases."""
    return canonical_encode(
        {"header": list(table.header), "rows": [list(r) for r in table.rows]}
    )


def payload_to_table(payload: bytes, source_uri="") -> StagedTable:
    obj = decode_canonical(payload)
    return StagedTable(
        header=tuple(obj["header"]),
        rows=tuple(tuple(r) for r in obj["rows"]),
        source_uri=source_uri,
    )


def table_to_csv(table: StagedTable, delimiter=",", quote='"') -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, quotechar=quote, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def clean_dedupe(table: StagedTable, key_columns):
    """Keep the first row per key, order preserved; duplicates are counted."""
    indexes = [table.column_index(c) for c in key_columns]
    seen = set()
    kept = []
    removed = 0
    for row in table.rows:
        key = tuple(row[i] for i in indexes)
        if key in seen:
            removed += 1
            continue
        seen.add(key)
        kept.append(row)
    cleaned = StagedTable(header=table.header, rows=tuple(kept), source_uri=table.source_uri)
    return cleaned, DedupeReport(removed=removed, kept=len(kept))
