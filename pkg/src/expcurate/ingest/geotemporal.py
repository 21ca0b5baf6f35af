"""Deterministic resolution of vague geo-temporal values.

Vague phrases resolve through a rule table (JSON-lines: pattern, kind,
resolution template); ISO-8601 values pass straight through as points.
Anything unmatched is flagged unresolved, never guessed. Season boundaries
depend on the hemisphere, which is a dataset-level setting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from importlib import resources
from typing import Optional

from expcurate.errors import CurationError, EncodingError
from expcurate.metamodel import parse_timestamp

HEMISPHERES = ("northern", "southern")

# (start month, start day, end month, end day, season spans new year)
_SEASONS = {
    "southern": {
        "summer": (12, 21, 3, 20, True),
        "autumn": (3, 21, 6, 20, False),
        "winter": (6, 21, 9, 20, False),
        "spring": (9, 21, 12, 20, False),
    },
    "northern": {
        "winter": (12, 21, 3, 20, True),
        "spring": (3, 21, 6, 20, False),
        "summer": (6, 21, 9, 20, False),
        "autumn": (9, 21, 12, 20, False),
    },
}


@dataclass(frozen=True)
class GeoTemporalRule:
    pattern: str
    kind: str  # "interval" | "point"
    resolution: str  # e.g. "last-season:summer"

    def __post_init__(self):
        re.compile(self.pattern)
        if self.kind not in ("interval", "point"):
            raise CurationError(f"rule kind must be interval or point: {self.kind!r}")


@dataclass(frozen=True)
class RuleTable:
    rules: tuple  # of GeoTemporalRule
    hemisphere: str = "northern"

    def __post_init__(self):
        if self.hemisphere not in HEMISPHERES:
            raise CurationError(f"hemisphere must be one of {HEMISPHERES}")


@dataclass(frozen=True)
class Resolution:
    kind: str  # "point" | "interval" | "unresolved"
    instant: Optional[datetime] = None
    start: Optional[datetime] = None
    end: Optional[datetime] = None

    @property
    def resolved(self):
        return self.kind != "unresolved"


UNRESOLVED = Resolution(kind="unresolved")


def rules_from_entries(entries, hemisphere="northern") -> RuleTable:
    rules = tuple(
        GeoTemporalRule(pattern=e["pattern"], kind=e["kind"], resolution=e["resolution"])
        for e in entries
    )
    return RuleTable(rules=rules, hemisphere=hemisphere)


def load_rule_table(path, hemisphere="northern") -> RuleTable:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(json.loads(line))
    return rules_from_entries(entries, hemisphere)


def default_rule_table(hemisphere="northern") -> RuleTable:
    text = resources.files("expcurate.data").joinpath("geotemporal_rules.jsonl").read_text()
    entries = [json.loads(line) for line in text.splitlines() if line.strip()]
    return rules_from_entries(entries, hemisphere)


def _midnight(d: date) -> datetime:
    return datetime(d.year, d.month, d.day, tzinfo=timezone.utc)


def _last_season(name: str, reference: datetime, hemisphere: str) -> Resolution:
    try:
        sm, sd, em, ed, spans = _SEASONS[hemisphere][name]
    except KeyError:
        raise CurationError(f"unknown season {name!r}")
    ref_day = reference.astimezone(timezone.utc).date()
    for year in (ref_day.year, ref_day.year - 1, ref_day.year - 2):
        end = date(year, em, ed)
        if end < ref_day:
            start = date(year - 1 if spans else year, sm, sd)
            return Resolution(kind="interval", start=_midnight(start), end=_midnight(end))
    raise CurationError("no completed season instance found")  # unreachable


def resolve_geotemporal(value: str, reference: datetime, rules: RuleTable) -> Resolution:
    """Map one textual time value to a point, an interval, or unresolved."""
    text = value.strip()
    if not text:
        return UNRESOLVED
    try:
        instant = parse_timestamp(text)
        return Resolution(kind="point", instant=instant)
    except EncodingError:
        pass
    for rule in rules.rules:
        if re.fullmatch(rule.pattern, text, re.IGNORECASE):
            if rule.resolution.startswith("last-season:"):
                season = rule.resolution.split(":", 1)[1]
                return _last_season(season, reference, rules.hemisphere)
            return UNRESOLVED  # unknown template: refuse to guess
    return UNRESOLVED


def resolve_geopoint(value: str):
    """Parse "lat,lon"; out-of-range coordinates come back unresolved (None)."""
    parts = value.strip().split(",")
    if len(parts) != 2:
        return None
    try:
        lat = float(parts[0])
        lon = float(parts[1])
    except ValueError:
        return None
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        return None
    return lat, lon
