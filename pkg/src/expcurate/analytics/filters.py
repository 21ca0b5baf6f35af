"""Filter expressions and item queries over releases and experiments.

A filter is a tree of predicates (column comparison, time-in-interval,
geo-in-bbox, tag-label, annotator, validation-status) combined with
AND/OR/NOT. Expressions arrive as JSON from the CLI and the HTTP API.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from expcurate.errors import CurationError, EncodingError, UnknownColumn, UnknownLabel
from expcurate.metamodel import parse_timestamp
from expcurate.metamodel.types import Experiment, Release, VERDICTS
from expcurate.ingest.geotemporal import resolve_geopoint
from expcurate.ingest.loader import release_table, release_texts
from expcurate.store import Store

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Cmp:
    column: str
    op: str
    value: object


@dataclass(frozen=True)
class TimeIn:
    column: str
    start: datetime
    end: datetime


@dataclass(frozen=True)
class GeoBox:
    column: str
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float


@dataclass(frozen=True)
class TagLabel:
    label: str


@dataclass(frozen=True)
class Annotator:
    author: str


@dataclass(frozen=True)
class Validated:
    verdict: str


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: object


def parse_filter(spec):
    """JSON dict -> expression tree; None or {} means match-all."""
    if spec is None or spec == {}:
        return None
    if "op" in spec:
        op = spec["op"]
        if op == "not":
            return Not(arg=parse_filter(spec["arg"] if "arg" in spec else spec["args"][0]))
        args = tuple(parse_filter(a) for a in spec["args"])
        if op == "and":
            return And(args=args)
        if op == "or":
            return Or(args=args)
        raise CurationError(f"unknown filter combinator {op!r}")
    pred = spec.get("pred")
    if pred == "cmp":
        if spec["cmp"] not in _CMP_OPS:
            raise CurationError(f"unknown comparison {spec['cmp']!r}")
        return Cmp(column=spec["column"], op=spec["cmp"], value=spec["value"])
    if pred == "time_in":
        return TimeIn(
            column=spec["column"],
            start=parse_timestamp(spec["start"]),
            end=parse_timestamp(spec["end"]),
        )
    if pred == "geo_bbox":
        return GeoBox(
            column=spec["column"],
            min_lat=float(spec["min_lat"]),
            max_lat=float(spec["max_lat"]),
            min_lon=float(spec["min_lon"]),
            max_lon=float(spec["max_lon"]),
        )
    if pred == "tag_label":
        return TagLabel(label=spec["label"])
    if pred == "annotator":
        return Annotator(author=spec["author"])
    if pred == "validated":
        if spec["verdict"] not in VERDICTS:
            raise CurationError(f"unknown verdict {spec['verdict']!r}")
        return Validated(verdict=spec["verdict"])
    raise CurationError(f"unknown predicate {pred!r}")


@dataclass(frozen=True)
class ItemView:
    item: object
    release: object
    cells: dict  # column -> cell text; empty for non-tabular items
    text: str  # text body for text items, else ""


def _scope_releases(store: Store, scope):
    if isinstance(scope, str):
        scope = store.require(scope)
    if isinstance(scope, Release):
        return [scope]
    if isinstance(scope, Experiment):
        seen = []
        for action in store.actions():
            if action.experiment_id != scope.id:
                continue
            for rid in list(action.inputs) + list(action.outputs):
                rec = store.get_any(rid)
                if isinstance(rec, Release) and rec not in seen:
                    seen.append(rec)
        return seen
    raise CurationError(f"scope must be a release or an experiment, got {type(scope).__name__}")


def scope_item_views(store: Store, scope):
    """Items of the scope in stable order, with their row cells attached."""
    views = []
    for release in _scope_releases(store, scope):
        cells_by_ordinal = {}
        texts = None
        if release.content_kind in ("tabular", "media-manifest"):
            table = release_table(store, release)
            for i, row in enumerate(table.rows):
                cells_by_ordinal[i] = dict(zip(table.header, row))
        elif release.content_kind == "text":
            texts = release_texts(store, release)
        for item in store.items_of(release.id):
            views.append(
                ItemView(
                    item=item,
                    release=release,
                    cells=cells_by_ordinal.get(item.ordinal, {}),
                    text=texts[item.ordinal] if texts is not None else "",
                )
            )
    return views


def _collect(expr, cls, out):
    if expr is None:
        return out
    if isinstance(expr, cls):
        out.append(expr)
    if isinstance(expr, (And, Or)):
        for a in expr.args:
            _collect(a, cls, out)
    elif isinstance(expr, Not):
        _collect(expr.arg, cls, out)
    return out


def _validate_filter(store, expr, views):
    headers = set()
    for view in views:
        headers.update(view.cells.keys())
    for pred in _collect(expr, (Cmp, TimeIn, GeoBox), []):
        if pred.column not in headers:
            raise UnknownColumn(pred.column)
    wanted = {p.label for p in _collect(expr, TagLabel, [])}
    if wanted:
        present = set()
        for view in views:
            for tag in store.tags_for(view.item.id):
                present.add(tag.label)
        missing = wanted - present
        if missing:
            raise UnknownLabel(", ".join(sorted(missing)))


def _numeric(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _evaluate(store: Store, expr, view: ItemView) -> bool:
    if expr is None:
        return True
    if isinstance(expr, And):
        return all(_evaluate(store, a, view) for a in expr.args)
    if isinstance(expr, Or):
        return any(_evaluate(store, a, view) for a in expr.args)
    if isinstance(expr, Not):
        return not _evaluate(store, expr.arg, view)
    if isinstance(expr, Cmp):
        cell = view.cells.get(expr.column)
        if cell is None or cell == "":
            return False
        left = _numeric(cell)
        right = _numeric(expr.value)
        if left is None or right is None:
            left, right = cell, str(expr.value)
        op = expr.op
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right
    if isinstance(expr, TimeIn):
        cell = view.cells.get(expr.column)
        if not cell:
            return False
        try:
            t = parse_timestamp(cell)
        except EncodingError:
            return False
        return expr.start <= t <= expr.end
    if isinstance(expr, GeoBox):
        cell = view.cells.get(expr.column)
        if not cell:
            return False
        point = resolve_geopoint(cell)
        if point is None:
            return False
        lat, lon = point
        return expr.min_lat <= lat <= expr.max_lat and expr.min_lon <= lon <= expr.max_lon
    if isinstance(expr, TagLabel):
        return any(t.label == expr.label for t in store.tags_for(view.item.id))
    if isinstance(expr, Annotator):
        return any(t.author == expr.author for t in store.tags_for(view.item.id))
    if isinstance(expr, Validated):
        from expcurate.curate import effective_verdict

        for tag in store.tags_for(view.item.id):
            latest = effective_verdict(store, tag.id)
            if latest is not None and latest.verdict == expr.verdict:
                return True
        return False
    raise CurationError(f"unknown filter node {type(expr).__name__}")


def query_items(store: Store, scope, expr=None):
    """Items of the scope satisfying the filter, in stable ordinal order."""
    if isinstance(expr, dict) or expr is None and not hasattr(expr, "args"):
        expr = parse_filter(expr) if isinstance(expr, dict) else expr
    views = scope_item_views(store, scope)
    _validate_filter(store, expr, views)
    return [v for v in views if _evaluate(store, expr, v)]
