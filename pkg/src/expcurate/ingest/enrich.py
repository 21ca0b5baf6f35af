"""Contextual enrichment: derived time-interval, geopoint and reliability columns."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from expcurate.errors import UnknownColumn
from expcurate.metamodel import format_timestamp
from expcurate.ingest.geotemporal import RuleTable, resolve_geopoint, resolve_geotemporal
from expcurate.ingest.tabular import StagedTable

TIME_COLUMNS = ("resolved_start", "resolved_end", "time_status")
GEO_COLUMNS = ("resolved_lat", "resolved_lon", "geo_status")
RELIABILITY_COLUMN = "reliability_grade"


@dataclass(frozen=True)
class ReliabilityRule:
    column: str
    equals: str
    grade: str


@dataclass(frozen=True)
class EnrichmentRules:
    time_column: Optional[str] = None
    location_column: Optional[str] = None
    reference: Optional[datetime] = None
    rule_table: Optional[RuleTable] = None
    reliability: tuple = ()  # of ReliabilityRule

    @property
    def empty(self):
        return (
            self.time_column is None
            and self.location_column is None
            and not self.reliability
        )


@dataclass(frozen=True)
class EnrichmentReport:
    time_resolved: int = 0
    time_unresolved: int = 0
    geo_resolved: int = 0
    geo_unresolved: int = 0


def rules_to_params(rules: EnrichmentRules) -> dict:
    """Canonical-encodable form, used for action parameters and pipeline specs."""
    params = {}
    if rules.time_column is not None:
        params["time_column"] = rules.time_column
        params["reference"] = format_timestamp(rules.reference)
    if rules.location_column is not None:
        params["location_column"] = rules.location_column
    if rules.rule_table is not None:
        params["hemisphere"] = rules.rule_table.hemisphere
        params["rules"] = [
            {"pattern": r.pattern, "kind": r.kind, "resolution": r.resolution}
            for r in rules.rule_table.rules
        ]
    if rules.reliability:
        params["reliability"] = [
            {"column": r.column, "equals": r.equals, "grade": r.grade}
            for r in rules.reliability
        ]
    return params


def rules_from_params(params: dict) -> EnrichmentRules:
    from expcurate.metamodel import parse_timestamp
    from expcurate.ingest.geotemporal import rules_from_entries

    rule_table = None
    if "rules" in params or "hemisphere" in params:
        rule_table = rules_from_entries(
            params.get("rules", []), params.get("hemisphere", "northern")
        )
    return EnrichmentRules(
        time_column=params.get("time_column"),
        location_column=params.get("location_column"),
        reference=parse_timestamp(params["reference"]) if "reference" in params else None,
        rule_table=rule_table,
        reliability=tuple(
            ReliabilityRule(column=r["column"], equals=r["equals"], grade=r["grade"])
            for r in params.get("reliability", [])
        ),
    )


def enrich(table: StagedTable, rules: EnrichmentRules):
    """Append derived columns; original columns stay untouched."""
    if rules.empty:
        return table, EnrichmentReport()
    header = list(table.header)
    extra_names = []
    time_idx = geo_idx = None
    if rules.time_column is not None:
        if rules.reference is None or rules.rule_table is None:
            raise UnknownColumn("time enrichment needs a reference and a rule table")
        time_idx = table.column_index(rules.time_column)
        extra_names.extend(TIME_COLUMNS)
    if rules.location_column is not None:
        geo_idx = table.column_index(rules.location_column)
        extra_names.extend(GEO_COLUMNS)
    rel_indexes = [(table.column_index(r.column), r) for r in rules.reliability]
    if rules.reliability:
        extra_names.append(RELIABILITY_COLUMN)
    already = [name for name in extra_names if name in table.header]
    if already:
        raise UnknownColumn(f"derived columns already present: {', '.join(already)}")

    rows = []
    time_resolved = time_unresolved = geo_resolved = geo_unresolved = 0
    for row in table.rows:
        extra = []
        if time_idx is not None:
            res = resolve_geotemporal(row[time_idx], rules.reference, rules.rule_table)
            if res.kind == "point":
                ts = format_timestamp(res.instant)
                extra.extend([ts, ts, "point"])
                time_resolved += 1
            elif res.kind == "interval":
                extra.extend(
                    [format_timestamp(res.start), format_timestamp(res.end), "interval"]
                )
                time_resolved += 1
            else:
                extra.extend(["", "", "unresolved"])
                time_unresolved += 1
        if geo_idx is not None:
            point = resolve_geopoint(row[geo_idx])
            if point is None:
                extra.extend(["", "", "unresolved"])
                geo_unresolved += 1
            else:
                lat_text, _, lon_text = row[geo_idx].partition(",")
                extra.extend([lat_text.strip(), lon_text.strip(), "point"])
                geo_resolved += 1
        if rel_indexes:
            grade = ""
            for idx, rule in rel_indexes:
                if row[idx] == rule.equals:
                    grade = rule.grade
                    break
            extra.append(grade)
        rows.append(tuple(row) + tuple(extra))

    enriched = StagedTable(
        header=tuple(header + extra_names), rows=tuple(rows), source_uri=table.source_uri
    )
    report = EnrichmentReport(
        time_resolved=time_resolved,
        time_unresolved=time_unresolved,
        geo_resolved=geo_resolved,
        geo_unresolved=geo_unresolved,
    )
    return enriched, report
