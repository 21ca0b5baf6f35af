"""Release profiling: column type inference, summary stats, histograms.

Types are inferred by ordered trials over the non-null cells
(boolean -> integer -> decimal -> timestamp -> geopoint -> string), so the
result never depends on row order. Numeric columns get population stats
and a 10-bin equal-width histogram whose counts sum to the non-null count.
"""

from __future__ import annotations

import math
import re

from expcurate.errors import EncodingError
from expcurate.metamodel import parse_timestamp
from expcurate.metamodel.types import ColumnProfile, Profile
from expcurate.ingest.geotemporal import resolve_geopoint
from expcurate.ingest.signal import SignalTrace
from expcurate.ingest.tabular import StagedTable

HISTOGRAM_BINS = 10

_INT_RE = re.compile(r"[+-]?\d+")
_DECIMAL_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def is_null(cell: str) -> bool:
    return cell == ""


def _is_boolean(cell):
    return cell.lower() in ("true", "false")


def _is_integer(cell):
    return _INT_RE.fullmatch(cell) is not None


def _is_decimal(cell):
    return _DECIMAL_RE.fullmatch(cell) is not None


def _is_timestamp(cell):
    try:
        parse_timestamp(cell)
        return True
    except EncodingError:
        return False


def _is_geopoint(cell):
    return resolve_geopoint(cell) is not None


_TRIALS = (
    ("boolean", _is_boolean),
    ("integer", _is_integer),
    ("decimal", _is_decimal),
    ("timestamp", _is_timestamp),
    ("geopoint", _is_geopoint),
)


def infer_type(cells) -> str:
    """First type whose trial accepts every non-null cell; string otherwise."""
    non_null = [c for c in cells if not is_null(c)]
    if not non_null:
        return "string"
    for name, trial in _TRIALS:
        if all(trial(c) for c in non_null):
            return name
    return "string"


def numeric_histogram(values):
    """10 equal-width bins over [min, max]; a constant column gets one bin."""
    lo = min(values)
    hi = max(values)
    if lo == hi:
        return (((lo, hi), len(values)),)
    width = (hi - lo) / HISTOGRAM_BINS
    counts = [0] * HISTOGRAM_BINS
    for v in values:
        idx = int((v - lo) / width)
        if idx >= HISTOGRAM_BINS:
            idx = HISTOGRAM_BINS - 1
        counts[idx] += 1
    edges = [lo + i * width for i in range(HISTOGRAM_BINS + 1)]
    edges[-1] = hi
    return tuple(((edges[i], edges[i + 1]), counts[i]) for i in range(HISTOGRAM_BINS))


def _profile_numeric_column(name, inferred, cells):
    non_null = [c for c in cells if not is_null(c)]
    values = [float(c) for c in non_null]
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n  # population
    return ColumnProfile(
        name=name,
        inferred_type=inferred,
        null_count=len(cells) - n,
        distinct_count=len(set(non_null)),
        minimum=min(values),
        maximum=max(values),
        mean=mean,
        stddev=math.sqrt(variance),
        histogram=numeric_histogram(values),
    )


def profile_column(name, cells) -> ColumnProfile:
    inferred = infer_type(cells)
    if inferred in ("integer", "decimal"):
        return _profile_numeric_column(name, inferred, cells)
    non_null = [c for c in cells if not is_null(c)]
    return ColumnProfile(
        name=name,
        inferred_type=inferred,
        null_count=len(cells) - len(non_null),
        distinct_count=len(set(non_null)),
    )


def profile_table(table: StagedTable, release_id="") -> Profile:
    columns = []
    for i, name in enumerate(table.header):
        cells = [row[i] for row in table.rows]
        columns.append(profile_column(name, cells))
    return Profile(release_id=release_id, record_count=len(table.rows), columns=tuple(columns))


def profile_signal(trace: SignalTrace, release_id="") -> Profile:
    cells = [repr(s) for s in trace.samples]
    column = _profile_numeric_column("amplitude", "decimal", cells)
    return Profile(release_id=release_id, record_count=len(trace.samples), columns=(column,))


def profile_texts(texts, release_id="") -> Profile:
    column = ColumnProfile(
        name="text",
        inferred_type="string",
        null_count=sum(1 for t in texts if not t),
        distinct_count=len(set(t for t in texts if t)),
    )
    return Profile(release_id=release_id, record_count=len(texts), columns=(column,))
