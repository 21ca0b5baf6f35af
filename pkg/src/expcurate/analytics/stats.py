"""Descriptive statistics, correlation, z-score anomalies and aggregation.

Population stddev throughout, matching the profiler. The trend statistic
in describe() is the least-squares slope of the values against their
0-based positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from expcurate.errors import EncodingError, LengthMismatch, TooFew, UnknownColumn
from expcurate.metamodel import parse_timestamp
from expcurate.analytics.tables import ResultTable

MEASURES = ("count", "sum", "mean", "min", "max")


@dataclass(frozen=True)
class DescribeResult:
    n: int
    mean: float
    stddev: float
    minimum: float
    maximum: float
    median: float
    trend_slope: float

    def to_record(self):
        return {
            "n": self.n,
            "mean": self.mean,
            "stddev": self.stddev,
            "minimum": self.minimum,
            "maximum": self.maximum,
            "median": self.median,
            "trend_slope": self.trend_slope,
        }


@dataclass(frozen=True)
class CorrelationResult:
    r: Optional[float]
    defined: bool

    def to_record(self):
        rec = {"defined": self.defined}
        if self.r is not None:
            rec["r"] = self.r
        return rec


def describe(values) -> DescribeResult:
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise TooFew(f"need at least 2 values, got {arr.size}")
    idx = np.arange(arr.size, dtype=float)
    idx_dev = idx - idx.mean()
    slope = float(np.dot(idx_dev, arr - arr.mean()) / np.dot(idx_dev, idx_dev))
    return DescribeResult(
        n=int(arr.size),
        mean=float(arr.mean()),
        stddev=float(arr.std()),
        minimum=float(arr.min()),
        maximum=float(arr.max()),
        median=float(np.median(arr)),
        trend_slope=slope,
    )


def correlate(x, y) -> CorrelationResult:
    xa = np.asarray(list(x), dtype=float)
    ya = np.asarray(list(y), dtype=float)
    if xa.size != ya.size:
        raise LengthMismatch(f"{xa.size} vs {ya.size}")
    if xa.size < 2:
        raise TooFew(f"need at least 2 pairs, got {xa.size}")
    sx = xa.std()
    sy = ya.std()
    if sx == 0.0 or sy == 0.0:
        return CorrelationResult(r=None, defined=False)
    cov = float(np.mean((xa - xa.mean()) * (ya - ya.mean())))
    return CorrelationResult(r=cov / float(sx * sy), defined=True)


def zscore_anomalies(values, threshold) -> list:
    """Indices with |value - mean| / stddev strictly above the threshold."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise TooFew(f"need at least 2 values, got {arr.size}")
    std = arr.std()
    if std == 0.0:
        return []
    z = np.abs(arr - arr.mean()) / std
    return [int(i) for i in np.nonzero(z > threshold)[0]]


# --- aggregation -----------------------------------------------------------


def _dim_value(view, dim):
    if ":" in dim:
        unit, _, column = dim.partition(":")
        cell = view.cells.get(column)
        if cell is None:
            raise UnknownColumn(column)
        try:
            t = parse_timestamp(cell)
        except EncodingError:
            return ""
        if unit == "year":
            return t.strftime("%Y")
        if unit == "month":
            return t.strftime("%Y-%m")
        if unit == "day":
            return t.strftime("%Y-%m-%d")
        raise UnknownColumn(f"unknown dim unit {unit!r}")
    cell = view.cells.get(dim)
    if cell is None:
        raise UnknownColumn(dim)
    return cell


def _measure_parts(measure):
    if measure == "count":
        return "count", None
    name, _, column = measure.partition(":")
    if name not in MEASURES or not column:
        raise UnknownColumn(f"bad measure {measure!r}")
    return name, column


def aggregate(views, dims, measures) -> ResultTable:
    """One row per dim combination; sorted by the dim values.

    Dims are column names or `year:`/`month:`/`day:` over timestamp
    columns. Measures are `count` or `sum|mean|min|max:<column>`.
    """
    parsed_measures = [_measure_parts(m) for m in measures]
    groups = {}
    for view in views:
        key = tuple(_dim_value(view, d) for d in dims)
        groups.setdefault(key, []).append(view)
    rows = []
    for key in sorted(groups):
        members = groups[key]
        out = list(key)
        for name, column in parsed_measures:
            if name == "count":
                out.append(len(members))
                continue
            cells = []
            for view in members:
                cell = view.cells.get(column)
                if cell is None:
                    raise UnknownColumn(column)
                if cell != "":
                    cells.append(float(cell))
            if not cells:
                out.append("")
            elif name == "sum":
                out.append(float(np.sum(cells)))
            elif name == "mean":
                out.append(float(np.mean(cells)))
            elif name == "min":
                out.append(float(np.min(cells)))
            else:
                out.append(float(np.max(cells)))
        rows.append(tuple(out))
    return ResultTable(columns=tuple(list(dims) + list(measures)), rows=tuple(rows))
