"""Experiment specification, tagging, review and registered transformations.

Tagging and review are append-only: re-tagging or re-reviewing never
replaces history, it extends it. The effective status of any target is a
pure function of its history. Every derived release is appended in the
same batch as its producing action so the cross references always hold.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from datetime import datetime

from expcurate.errors import (
    CurationError,
    EmptyTeam,
    MissingQuestion,
    NonNumericColumn,
    NotTeamMember,
    NotTextBearing,
    SeniorRequired,
    StaleHistory,
    UnknownColumn,
    UnknownTarget,
    UnmappedRequired,
)
from expcurate.metamodel import canonical_encode, decode_canonical, new_id, parse_timestamp
from expcurate.metamodel.types import (
    Action,
    Artefact,
    Experiment,
    ExperimentSettings,
    Item,
    Member,
    Provenance,
    Release,
    Tag,
    ValidationRecord,
)
from expcurate.ingest.enrich import EnrichmentRules, enrich, rules_to_params
from expcurate.ingest.loader import prepare_release, release_table, release_texts
from expcurate.store import Store

REQUIRED_MODEL_FIELDS = ("external_id", "location", "media_url", "source")


# --- experiments ----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentCreated:
    experiment: Experiment
    warnings: tuple


def _coerce_member(entry) -> Member:
    if isinstance(entry, Member):
        return entry
    return Member(
        id=entry.get("id") or new_id("mem"),
        name=entry["name"],
        role=entry.get("role", ""),
        seniority=entry["seniority"],
        responsibilities=tuple(entry.get("responsibilities", [])),
    )


def _coerce_settings(settings) -> ExperimentSettings:
    if settings is None:
        return ExperimentSettings()
    if isinstance(settings, ExperimentSettings):
        return settings
    return ExperimentSettings(
        selection_criteria=tuple(settings.get("selection_criteria", [])),
        performance_constraints=dict(settings.get("performance_constraints", {})),
        inclusion_rules=tuple(settings.get("inclusion_rules", [])),
    )


def create_experiment(store: Store, *, name, research_question, date, team, settings=None):
    """Append a draft experiment at cycle 1; junior-only teams ship with a warning."""
    if not research_question:
        raise MissingQuestion("research_question is required")
    if not team:
        raise EmptyTeam("team must have at least one member")
    if isinstance(date, str):
        date = parse_timestamp(date)
    experiment = Experiment(
        id=new_id("exp"),
        name=name,
        research_question=research_question,
        date=date,
        team=tuple(_coerce_member(m) for m in team),
        settings=_coerce_settings(settings),
        cycle=1,
        status="draft",
    )
    store.append(experiment)
    warnings = ()
    if not experiment.has_senior():
        warnings = ("publishing will be blocked: no senior member on the team",)
    return ExperimentCreated(experiment=experiment, warnings=warnings)


def update_experiment(store: Store, experiment_id, *, status=None, cycle=None) -> Experiment:
    current = store.require(experiment_id, Experiment)
    updated = Experiment(
        id=current.id,
        name=current.name,
        research_question=current.research_question,
        date=current.date,
        team=current.team,
        settings=current.settings,
        cycle=cycle if cycle is not None else current.cycle,
        status=status if status is not None else current.status,
    )
    store.append(updated)
    return updated


def publish_experiment(store: Store, experiment_id, member_id, comment="") -> Experiment:
    """Senior-gated publish: records the validation, then flips the status."""
    review(store, experiment_id, member_id, "accepted", comment=comment)
    return update_experiment(store, experiment_id, status="published")


# --- tag rule sets --------------------------------------------------------


@dataclass(frozen=True)
class TagRule:
    pattern: str
    label: str
    confidence: float

    def __post_init__(self):
        re.compile(self.pattern)
        if not (0.0 <= self.confidence <= 1.0):
            raise CurationError(f"rule confidence outside [0,1]: {self.confidence}")


@dataclass(frozen=True)
class TagRuleSet:
    name: str
    rules: tuple  # of TagRule

    def to_record(self):
        return {
            "name": self.name,
            "rules": [
                {"pattern": r.pattern, "label": r.label, "confidence": r.confidence}
                for r in self.rules
            ],
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            name=d["name"],
            rules=tuple(
                TagRule(
                    pattern=r["pattern"],
                    label=r["label"],
                    confidence=float(r["confidence"]),
                )
                for r in d["rules"]
            ),
        )


def load_ruleset(source) -> TagRuleSet:
    """From a JSON file path, JSON bytes, or an already-parsed dict."""
    if isinstance(source, dict):
        return TagRuleSet.from_record(source)
    if isinstance(source, (bytes, bytearray)):
        return TagRuleSet.from_record(json.loads(bytes(source).decode("utf-8")))
    with open(source, "r", encoding="utf-8") as fh:
        return TagRuleSet.from_record(json.load(fh))


# --- tagging --------------------------------------------------------------


def item_texts(store: Store, release: Release, text_column=None):
    """(item, text) pairs for a text-bearing release, in ordinal order."""
    items = store.items_of(release.id)
    if release.content_kind == "text":
        texts = release_texts(store, release)
        return [(item, texts[item.ordinal]) for item in items]
    if release.content_kind in ("tabular", "media-manifest"):
        if text_column is None:
            raise NotTextBearing(
                f"release {release.id} is {release.content_kind}; a text column is required"
            )
        table = release_table(store, release)
        idx = table.column_index(text_column)
        return [(item, table.rows[item.ordinal][idx]) for item in items]
    raise NotTextBearing(f"release {release.id} carries {release.content_kind} content")


@dataclass(frozen=True)
class RuleTagResult:
    tags: tuple
    action: Action


def apply_rule_tags(
    store: Store, release_id, ruleset: TagRuleSet, experiment_id, text_column=None, executor=None
) -> RuleTagResult:
    """One algorithmic tag per (item, matching rule); a single automated action records the run."""
    release = store.require(release_id, Release)
    store.require(experiment_id, Experiment)
    pairs = item_texts(store, release, text_column=text_column)
    started = store.next_timestamp()
    tags = []
    label_counts = {}
    tagged_items = set()
    for item, text in pairs:
        for rule in ruleset.rules:
            if re.search(rule.pattern, text, re.IGNORECASE):
                tags.append(
                    Tag(
                        id=new_id("tag"),
                        target=item.id,
                        label=rule.label,
                        origin="algorithmic",
                        author=ruleset.name,
                        experiment_id=experiment_id,
                        created_at=store.next_timestamp(),
                        confidence=rule.confidence,
                    )
                )
                label_counts[rule.label] = label_counts.get(rule.label, 0) + 1
                tagged_items.add(item.id)
    evaluation = {"items": len(pairs), "tagged_items": len(tagged_items), "tags": len(tags)}
    for label, count in sorted(label_counts.items()):
        evaluation[f"label:{label}"] = count
    action = Action(
        id=new_id("act"),
        experiment_id=experiment_id,
        kind_of_step="automated",
        operation="apply_rule_tags",
        parameters={"ruleset": ruleset.to_record(), "text_column": text_column or ""},
        inputs=(release_id,),
        outputs=(),
        executor=executor or ruleset.name,
        evaluation=evaluation,
        validation_protocol="",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([*tags, action])
    return RuleTagResult(tags=tuple(tags), action=action)


def apply_user_tag(store: Store, item_id, label, member_id, experiment_id) -> Tag:
    experiment = store.require(experiment_id, Experiment)
    if experiment.member(member_id) is None:
        raise NotTeamMember(f"{member_id} is not on team of {experiment_id}")
    store.require(item_id)
    tag = Tag(
        id=new_id("tag"),
        target=item_id,
        label=label,
        origin="user",
        author=member_id,
        experiment_id=experiment_id,
        created_at=store.next_timestamp(),
        confidence=None,
    )
    store.append(tag)
    return tag


def import_labels(store: Store, release_id, source, author, experiment_id, executor=None):
    """Model-produced labels enter as algorithmic tags from a
    `item_external_id,label,confidence` CSV (header optional)."""
    release = store.require(release_id, Release)
    store.require(experiment_id, Experiment)
    if isinstance(source, (bytes, bytearray)):
        rows = list(csv.reader(io.StringIO(bytes(source).decode("utf-8"))))
    elif isinstance(source, (list, tuple)):
        rows = [list(r) for r in source]
    else:
        with open(source, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    if rows and rows[0][:2] == ["item_external_id", "label"]:
        rows = rows[1:]
    by_external = {
        item.external_id: item
        for item in store.items_of(release.id)
        if item.external_id is not None
    }
    started = store.next_timestamp()
    tags = []
    for ext_id, label, confidence in rows:
        item = by_external.get(ext_id)
        if item is None:
            raise UnknownTarget(f"no item with external id {ext_id!r} in {release_id}")
        tags.append(
            Tag(
                id=new_id("tag"),
                target=item.id,
                label=label,
                origin="algorithmic",
                author=author,
                experiment_id=experiment_id,
                created_at=store.next_timestamp(),
                confidence=float(confidence),
            )
        )
    action = Action(
        id=new_id("act"),
        experiment_id=experiment_id,
        kind_of_step="automated",
        operation="import_labels",
        parameters={"author": author, "labels": len(tags)},
        inputs=(release_id,),
        outputs=(),
        executor=executor or author,
        evaluation={"tags": len(tags)},
        validation_protocol="",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([*tags, action])
    return tuple(tags), action


# --- review and history ---------------------------------------------------


def tag_history(store: Store, target_id):
    """All tags and validation verdicts for a target, oldest first."""
    if store.get_any(target_id) is None:
        raise UnknownTarget(target_id)
    entries = list(store.tags_for(target_id)) + list(store.validations_for(target_id))
    entries.sort(key=lambda e: e.created_at)
    return entries


def history_seq(store: Store, target_id) -> int:
    """Optimistic-concurrency token: current history length."""
    return len(tag_history(store, target_id))


def _publish_level(store: Store, target) -> bool:
    if isinstance(target, Experiment):
        return True
    return isinstance(target, Artefact) and target.structure == "bulletin"


def _experiment_for_target(store: Store, target):
    if isinstance(target, Experiment):
        return target
    if isinstance(target, Tag):
        return store.get_any(target.experiment_id)
    if isinstance(target, Artefact):
        action = store.get_any(target.action_id)
        return store.get_any(action.experiment_id) if action else None
    return None


def review(store: Store, target_id, member_id, verdict, comment="", expected_seq=None):
    """Append a verdict; the target's effective status becomes the latest verdict."""
    target = store.get_any(target_id)
    if target is None:
        raise UnknownTarget(target_id)
    member = store.find_member(member_id)
    if member is None:
        raise NotTeamMember(member_id)
    experiment = _experiment_for_target(store, target)
    if experiment is not None and experiment.member(member_id) is None:
        raise NotTeamMember(f"{member_id} is not on team of {experiment.id}")
    if _publish_level(store, target) and member.seniority != "senior":
        raise SeniorRequired(f"publish-level validation of {target_id} needs a senior member")
    if expected_seq is not None:
        current = history_seq(store, target_id)
        if current != expected_seq:
            raise StaleHistory(f"history moved to seq {current}, caller saw {expected_seq}")
    record = ValidationRecord(
        id=new_id("val"),
        target=target_id,
        validator=member_id,
        verdict=verdict,
        comment=comment,
        created_at=store.next_timestamp(),
    )
    store.append(record)
    return record


def effective_verdict(store: Store, target_id, senior_only=False):
    """Latest verdict for a target, optionally counting only senior validators."""
    verdicts = store.validations_for(target_id)
    if senior_only:
        filtered = []
        for v in verdicts:
            member = store.find_member(v.validator)
            if member is not None and member.seniority == "senior":
                filtered.append(v)
        verdicts = filtered
    return verdicts[-1] if verdicts else None


def batch_review(store: Store, release_id, verdicts, validator_id, experiment_id, executor=None):
    """Apply (item external id -> verdict) decisions to each item's latest tag.

    This is the registered, replayable form of review: the decisions travel
    as parameters, so re-execution applies the identical verdict multiset.
    """
    release = store.require(release_id, Release)
    experiment = store.require(experiment_id, Experiment)
    if experiment.member(validator_id) is None:
        raise NotTeamMember(f"{validator_id} is not on team of {experiment_id}")
    by_external = {
        item.external_id: item
        for item in store.items_of(release.id)
        if item.external_id is not None
    }
    started = store.next_timestamp()
    records = []
    counts = {"accepted": 0, "rejected": 0}
    for entry in verdicts:
        ext_id, verdict = entry["item"], entry["verdict"]
        item = by_external.get(ext_id)
        if item is None:
            raise UnknownTarget(f"no item with external id {ext_id!r} in {release_id}")
        tags = store.tags_for(item.id)
        if not tags:
            raise UnknownTarget(f"item {ext_id!r} has no tag to review")
        records.append(
            ValidationRecord(
                id=new_id("val"),
                target=tags[-1].id,
                validator=validator_id,
                verdict=verdict,
                comment="",
                created_at=store.next_timestamp(),
            )
        )
        counts[verdict] = counts.get(verdict, 0) + 1
    action = Action(
        id=new_id("act"),
        experiment_id=experiment_id,
        kind_of_step="manual",
        operation="batch_review",
        parameters={"validator": validator_id, "decisions": len(verdicts)},
        inputs=(release_id,),
        outputs=(),
        executor=executor or validator_id,
        evaluation=counts,
        validation_protocol="batch verdict list",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([*records, action])
    return tuple(records), action


# --- registered transformations --------------------------------------------


@dataclass(frozen=True)
class TransformResult:
    release: Release
    action: Action
    load: object  # LoadResult


def _derived_release(store, source: Release, staged, action_builder, content_kind="tabular",
                     external_id_column=None):
    """Prepare the derived release and its action, append as one batch."""
    action_id = new_id("act")
    started = store.next_timestamp()
    result = prepare_release(
        store,
        source.dataset_id,
        staged,
        content_kind=content_kind,
        license=source.license,
        provenance=Provenance(kind="derived", ref=action_id),
        external_id_column=external_id_column,
    )
    action = action_builder(action_id, started, result)
    store.append_batch([*result.records, action])
    return TransformResult(release=result.release, action=action, load=result)


def map_headers(store: Store, release_id, mapping, experiment_id, absent=(), executor=None):
    """Rename columns onto the metadata model; registered as an automated action."""
    release = store.require(release_id, Release)
    store.require(experiment_id, Experiment)
    table = release_table(store, release)
    for old in mapping:
        if old not in table.header:
            raise UnknownColumn(old)
    new_header = tuple(mapping.get(col, col) for col in table.header)
    if len(set(new_header)) != len(new_header):
        raise UnknownColumn("mapping produces duplicate column names")
    missing = [
        f for f in REQUIRED_MODEL_FIELDS if f not in new_header and f not in absent
    ]
    if missing:
        raise UnmappedRequired(f"unmapped required fields: {', '.join(missing)}")
    from expcurate.ingest.tabular import StagedTable

    staged = StagedTable(header=new_header, rows=table.rows, source_uri=release.id)

    def build_action(action_id, started, result):
        return Action(
            id=action_id,
            experiment_id=experiment_id,
            kind_of_step="automated",
            operation="map_headers",
            parameters={"mapping": dict(mapping), "absent": list(absent)},
            inputs=(release_id,),
            outputs=(result.release.id,),
            executor=executor or "map_headers",
            evaluation={"columns": len(new_header), "rows": len(staged.rows)},
            validation_protocol="",
            started_at=started,
            finished_at=store.next_timestamp(),
            status="succeeded",
        )

    ext_col = "external_id" if "external_id" in new_header else None
    return _derived_release(store, release, staged, build_action, external_id_column=ext_col)


def normalize_geotemporal(store: Store, release_id, rules: EnrichmentRules, experiment_id,
                          executor=None):
    """Enrich + load as a derived release; unresolved rows are counted in the action."""
    release = store.require(release_id, Release)
    store.require(experiment_id, Experiment)
    table = release_table(store, release)
    enriched, report = enrich(table, rules)

    def build_action(action_id, started, result):
        evaluation = {
            "resolved": report.time_resolved,
            "unresolved": report.time_unresolved,
        }
        if rules.location_column is not None:
            evaluation["geo_resolved"] = report.geo_resolved
            evaluation["geo_unresolved"] = report.geo_unresolved
        return Action(
            id=action_id,
            experiment_id=experiment_id,
            kind_of_step="automated",
            operation="normalize_geotemporal",
            parameters=rules_to_params(rules),
            inputs=(release_id,),
            outputs=(result.release.id,),
            executor=executor or "normalize_geotemporal",
            evaluation=evaluation,
            validation_protocol="",
            started_at=started,
            finished_at=store.next_timestamp(),
            status="succeeded",
        )

    ext_col = "external_id" if "external_id" in enriched.header else None
    return _derived_release(store, release, enriched, build_action, external_id_column=ext_col)


@dataclass(frozen=True)
class FeatureResult:
    artefact: Artefact
    action: Action
    dropped_rows: int


def matrix_to_blob(columns, rows) -> bytes:
    return canonical_encode(
        {
            "columns": list(columns),
            "shape": [len(rows), len(columns)],
            "data": [[float(v) for v in row] for row in rows],
        }
    )


def matrix_from_blob(data: bytes):
    obj = decode_canonical(data)
    rows = [[float(v) for v in row] for row in obj["data"]]
    return obj["columns"], rows


def prepare_features(store: Store, release_id, columns, experiment_id, executor=None):
    """Numeric feature matrix artefact; rows with nulls in the selected columns drop."""
    release = store.require(release_id, Release)
    store.require(experiment_id, Experiment)
    if not columns:
        raise NonNumericColumn("no columns requested")
    profile = store.get_profile(release)
    types = {c.name: c.inferred_type for c in profile.columns}
    for col in columns:
        if col not in types:
            raise UnknownColumn(col)
        if types[col] not in ("integer", "decimal"):
            raise NonNumericColumn(f"{col} profiled as {types[col]}")
    table = release_table(store, release)
    indexes = [table.column_index(c) for c in columns]
    matrix = []
    dropped = 0
    for row in table.rows:
        cells = [row[i] for i in indexes]
        if any(cell == "" for cell in cells):
            dropped += 1
            continue
        matrix.append([float(cell) for cell in cells])
    blob = matrix_to_blob(columns, matrix)
    digest = store.put_blob(blob)
    started = store.next_timestamp()
    action_id = new_id("act")
    artefact = Artefact(
        id=new_id("art"),
        action_id=action_id,
        structure=f"feature-matrix {len(matrix)}x{len(columns)}",
        metrics={"rows": len(matrix), "cols": len(columns), "dropped_rows": dropped},
        blob_hash=digest,
    )
    action = Action(
        id=action_id,
        experiment_id=experiment_id,
        kind_of_step="automated",
        operation="prepare_features",
        parameters={"columns": list(columns)},
        inputs=(release_id,),
        outputs=(artefact.id,),
        executor=executor or "prepare_features",
        evaluation={"rows": len(matrix), "dropped_rows": dropped},
        validation_protocol="",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([artefact, action])
    return FeatureResult(artefact=artefact, action=action, dropped_rows=dropped)
