"""Domain records for the three metadata levels.

Level 1 covers raw content (Dataset, Release, Item, Annotation, Profile),
level 2 the recorded processing steps (Action, Artefact), level 3 the team
context (Experiment, Member). All records are immutable values; updates are
modeled as re-appends of a record with the same id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Union

from expcurate.metamodel.encoding import format_timestamp, parse_timestamp

CONTENT_KINDS = ("tabular", "text", "signal", "media-manifest")
ACTION_KINDS = ("manual", "automated")
ACTION_STATUSES = ("succeeded", "failed")
EXPERIMENT_STATUSES = ("draft", "active", "published")
SENIORITIES = ("junior", "senior")
TAG_ORIGINS = ("algorithmic", "user")
VERDICTS = ("accepted", "rejected")
ANNOTATION_KINDS = ("text", "media")
RUN_STATUSES = ("succeeded", "failed", "partial")
SIZE_BUCKETS = ("<1MB", "1-100MB", ">100MB")
COLUMN_TYPES = ("boolean", "integer", "decimal", "timestamp", "geopoint", "string")

_HEX = set("0123456789abcdef")


def is_digest(value) -> bool:
    return isinstance(value, str) and len(value) == 64 and set(value) <= _HEX


@dataclass(frozen=True)
class Provenance:
    kind: str  # "external" | "derived"
    ref: str  # source description, or producing action id

    def to_record(self):
        return {"kind": self.kind, "ref": self.ref}

    @classmethod
    def from_record(cls, d):
        return cls(kind=d["kind"], ref=d["ref"])


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    description: str
    domain: str
    created_at: datetime

    kind = "dataset"

    def to_record(self):
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "domain": self.domain,
            "created_at": format_timestamp(self.created_at),
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            name=d["name"],
            description=d["description"],
            domain=d["domain"],
            created_at=parse_timestamp(d["created_at"]),
        )


@dataclass(frozen=True)
class Release:
    id: str
    dataset_id: str
    version: int
    license: str
    size_bytes: int
    provenance: Provenance
    content_kind: str
    content_hash: str
    created_at: datetime
    profile_id: Optional[str] = None

    kind = "release"

    def to_record(self):
        rec = {
            "id": self.id,
            "dataset_id": self.dataset_id,
            "version": self.version,
            "license": self.license,
            "size_bytes": self.size_bytes,
            "provenance": self.provenance.to_record(),
            "content_kind": self.content_kind,
            "content_hash": self.content_hash,
            "created_at": format_timestamp(self.created_at),
        }
        if self.profile_id is not None:
            rec["profile_id"] = self.profile_id
        return rec

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            dataset_id=d["dataset_id"],
            version=int(d["version"]),
            license=d["license"],
            size_bytes=int(d["size_bytes"]),
            provenance=Provenance.from_record(d["provenance"]),
            content_kind=d["content_kind"],
            content_hash=d["content_hash"],
            created_at=parse_timestamp(d["created_at"]),
            profile_id=d.get("profile_id"),
        )


@dataclass(frozen=True)
class Item:
    id: str
    release_id: str
    ordinal: int
    payload: Union[dict, str]  # {"row": n} | text body | {"blob": digest}
    external_id: Optional[str] = None

    kind = "item"

    def to_record(self):
        rec = {
            "id": self.id,
            "release_id": self.release_id,
            "ordinal": self.ordinal,
            "payload": self.payload,
        }
        if self.external_id is not None:
            rec["external_id"] = self.external_id
        return rec

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            release_id=d["release_id"],
            ordinal=int(d["ordinal"]),
            payload=d["payload"],
            external_id=d.get("external_id"),
        )


@dataclass(frozen=True)
class Annotation:
    id: str
    item_id: str
    author_id: str
    kind_of_body: str  # "text" | "media"
    body: str  # text, or blob digest for media
    created_at: datetime

    kind = "annotation"

    def to_record(self):
        return {
            "id": self.id,
            "item_id": self.item_id,
            "author_id": self.author_id,
            "kind_of_body": self.kind_of_body,
            "body": self.body,
            "created_at": format_timestamp(self.created_at),
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            item_id=d["item_id"],
            author_id=d["author_id"],
            kind_of_body=d["kind_of_body"],
            body=d["body"],
            created_at=parse_timestamp(d["created_at"]),
        )


@dataclass(frozen=True)
class ColumnProfile:
    name: str
    inferred_type: str
    null_count: int
    distinct_count: int
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    mean: Optional[float] = None
    stddev: Optional[float] = None
    histogram: tuple = ()  # ((lo, hi), count) pairs, numeric columns only

    def to_record(self):
        rec = {
            "name": self.name,
            "inferred_type": self.inferred_type,
            "null_count": self.null_count,
            "distinct_count": self.distinct_count,
        }
        for key, value in (
            ("minimum", self.minimum),
            ("maximum", self.maximum),
            ("mean", self.mean),
            ("stddev", self.stddev),
        ):
            if value is not None:
                rec[key] = value
        if self.histogram:
            rec["histogram"] = [[[lo, hi], count] for (lo, hi), count in self.histogram]
        return rec

    @classmethod
    def from_record(cls, d):
        def _f(key):
            return float(d[key]) if key in d else None

        histogram = tuple(
            ((float(edges[0]), float(edges[1])), int(count))
            for edges, count in d.get("histogram", [])
        )
        return cls(
            name=d["name"],
            inferred_type=d["inferred_type"],
            null_count=int(d["null_count"]),
            distinct_count=int(d["distinct_count"]),
            minimum=_f("minimum"),
            maximum=_f("maximum"),
            mean=_f("mean"),
            stddev=_f("stddev"),
            histogram=histogram,
        )


@dataclass(frozen=True)
class Profile:
    release_id: str
    record_count: int
    columns: tuple  # of ColumnProfile

    kind = "profile"

    def to_record(self):
        # the blob form omits the back-reference: identical payloads must
        # profile to identical bytes regardless of which release they join
        rec = {
            "record_count": self.record_count,
            "columns": [c.to_record() for c in self.columns],
        }
        if self.release_id:
            rec["release_id"] = self.release_id
        return rec

    @classmethod
    def from_record(cls, d):
        return cls(
            release_id=d.get("release_id", ""),
            record_count=int(d["record_count"]),
            columns=tuple(ColumnProfile.from_record(c) for c in d["columns"]),
        )


@dataclass(frozen=True)
class Action:
    id: str
    experiment_id: str
    kind_of_step: str  # "manual" | "automated"
    operation: str
    parameters: dict
    inputs: tuple  # release ids
    outputs: tuple  # release / artefact ids
    executor: str  # member id or tool name
    evaluation: dict
    validation_protocol: str
    started_at: datetime
    finished_at: datetime
    status: str

    kind = "action"

    def to_record(self):
        return {
            "id": self.id,
            "experiment_id": self.experiment_id,
            "kind_of_step": self.kind_of_step,
            "operation": self.operation,
            "parameters": self.parameters,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "executor": self.executor,
            "evaluation": self.evaluation,
            "validation_protocol": self.validation_protocol,
            "started_at": format_timestamp(self.started_at),
            "finished_at": format_timestamp(self.finished_at),
            "status": self.status,
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            experiment_id=d["experiment_id"],
            kind_of_step=d["kind_of_step"],
            operation=d["operation"],
            parameters=d["parameters"],
            inputs=tuple(d["inputs"]),
            outputs=tuple(d["outputs"]),
            executor=d["executor"],
            evaluation=d["evaluation"],
            validation_protocol=d["validation_protocol"],
            started_at=parse_timestamp(d["started_at"]),
            finished_at=parse_timestamp(d["finished_at"]),
            status=d["status"],
        )


@dataclass(frozen=True)
class Artefact:
    id: str
    action_id: str
    structure: str  # e.g. "feature-matrix 546x8", "bulletin"
    metrics: dict  # name -> numeric
    blob_hash: str

    kind = "artefact"

    def to_record(self):
        return {
            "id": self.id,
            "action_id": self.action_id,
            "structure": self.structure,
            "metrics": self.metrics,
            "blob_hash": self.blob_hash,
        }

    @classmethod
    def from_record(cls, d):
        metrics = {k: float(v) if isinstance(v, str) else v for k, v in d["metrics"].items()}
        return cls(
            id=d["id"],
            action_id=d["action_id"],
            structure=d["structure"],
            metrics=metrics,
            blob_hash=d["blob_hash"],
        )


@dataclass(frozen=True)
class Member:
    id: str
    name: str
    role: str
    seniority: str
    responsibilities: tuple = ()

    kind = "member"

    def to_record(self):
        return {
            "id": self.id,
            "name": self.name,
            "role": self.role,
            "seniority": self.seniority,
            "responsibilities": list(self.responsibilities),
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            name=d["name"],
            role=d["role"],
            seniority=d["seniority"],
            responsibilities=tuple(d.get("responsibilities", [])),
        )


@dataclass(frozen=True)
class ExperimentSettings:
    selection_criteria: tuple = ()
    performance_constraints: dict = field(default_factory=dict)
    inclusion_rules: tuple = ()

    def to_record(self):
        return {
            "selection_criteria": list(self.selection_criteria),
            "performance_constraints": self.performance_constraints,
            "inclusion_rules": list(self.inclusion_rules),
        }

    @classmethod
    def from_record(cls, d):
        constraints = {
            k: float(v) if isinstance(v, str) else v
            for k, v in d.get("performance_constraints", {}).items()
        }
        return cls(
            selection_criteria=tuple(d.get("selection_criteria", [])),
            performance_constraints=constraints,
            inclusion_rules=tuple(d.get("inclusion_rules", [])),
        )


@dataclass(frozen=True)
class Experiment:
    id: str
    name: str
    research_question: str
    date: datetime
    team: tuple  # of Member
    settings: ExperimentSettings
    cycle: int
    status: str

    kind = "experiment"

    def to_record(self):
        return {
            "id": self.id,
            "name": self.name,
            "research_question": self.research_question,
            "date": format_timestamp(self.date),
            "team": [m.to_record() for m in self.team],
            "settings": self.settings.to_record(),
            "cycle": self.cycle,
            "status": self.status,
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            name=d["name"],
            research_question=d["research_question"],
            date=parse_timestamp(d["date"]),
            team=tuple(Member.from_record(m) for m in d["team"]),
            settings=ExperimentSettings.from_record(d["settings"]),
            cycle=int(d["cycle"]),
            status=d["status"],
        )

    def member(self, member_id: str) -> Optional[Member]:
        for m in self.team:
            if m.id == member_id:
                return m
        return None

    def has_senior(self) -> bool:
        return any(m.seniority == "senior" for m in self.team)


@dataclass(frozen=True)
class Tag:
    id: str
    target: str  # release / item / action id
    label: str
    origin: str  # "algorithmic" | "user"
    author: str  # member id or rule-set name
    experiment_id: str
    created_at: datetime
    confidence: Optional[float] = None

    kind = "tag"

    def to_record(self):
        rec = {
            "id": self.id,
            "target": self.target,
            "label": self.label,
            "origin": self.origin,
            "author": self.author,
            "experiment_id": self.experiment_id,
            "created_at": format_timestamp(self.created_at),
        }
        if self.confidence is not None:
            rec["confidence"] = self.confidence
        return rec

    @classmethod
    def from_record(cls, d):
        confidence = d.get("confidence")
        if isinstance(confidence, str):
            confidence = float(confidence)
        return cls(
            id=d["id"],
            target=d["target"],
            label=d["label"],
            origin=d["origin"],
            author=d["author"],
            experiment_id=d["experiment_id"],
            created_at=parse_timestamp(d["created_at"]),
            confidence=confidence,
        )


@dataclass(frozen=True)
class ValidationRecord:
    id: str
    target: str  # tag / release / experiment / artefact id
    validator: str  # member id
    verdict: str
    comment: str
    created_at: datetime

    kind = "validation"

    def to_record(self):
        return {
            "id": self.id,
            "target": self.target,
            "validator": self.validator,
            "verdict": self.verdict,
            "comment": self.comment,
            "created_at": format_timestamp(self.created_at),
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            target=d["target"],
            validator=d["validator"],
            verdict=d["verdict"],
            comment=d["comment"],
            created_at=parse_timestamp(d["created_at"]),
        )


@dataclass(frozen=True)
class CatalogueAssignment:
    release_id: str
    day: str  # ingestion date, YYYY-MM-DD
    size_bucket: str
    format_kind: str

    kind = "catalogue_assignment"

    @property
    def id(self):
        return self.release_id

    def to_record(self):
        return {
            "release_id": self.release_id,
            "day": self.day,
            "size_bucket": self.size_bucket,
            "format_kind": self.format_kind,
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            release_id=d["release_id"],
            day=d["day"],
            size_bucket=d["size_bucket"],
            format_kind=d["format_kind"],
        )


@dataclass(frozen=True)
class PipelineStep:
    op: str
    params: dict
    bind: tuple  # binding tokens: "step:<i>" | "release:<id>" | "input:<name>" | "path:<p>"

    def to_record(self):
        return {"op": self.op, "params": self.params, "bind": list(self.bind)}

    @classmethod
    def from_record(cls, d):
        return cls(op=d["op"], params=d.get("params", {}), bind=tuple(d.get("bind", [])))


@dataclass(frozen=True)
class Pipeline:
    id: str
    steps: tuple  # of PipelineStep

    kind = "pipeline"

    def to_record(self):
        return {"id": self.id, "steps": [s.to_record() for s in self.steps]}

    @classmethod
    def from_record(cls, d):
        return cls(id=d["id"], steps=tuple(PipelineStep.from_record(s) for s in d["steps"]))


@dataclass(frozen=True)
class StepRecord:
    op: str
    action_id: str
    input_hashes: tuple
    output_hashes: tuple
    started_at: datetime
    finished_at: datetime
    error: Optional[str] = None
    bound: tuple = ()  # resolved binding tokens, aligned with input_hashes

    def to_record(self):
        rec = {
            "op": self.op,
            "action_id": self.action_id,
            "input_hashes": list(self.input_hashes),
            "output_hashes": list(self.output_hashes),
            "started_at": format_timestamp(self.started_at),
            "finished_at": format_timestamp(self.finished_at),
            "bound": list(self.bound),
        }
        if self.error is not None:
            rec["error"] = self.error
        return rec

    @classmethod
    def from_record(cls, d):
        return cls(
            op=d["op"],
            action_id=d["action_id"],
            input_hashes=tuple(d["input_hashes"]),
            output_hashes=tuple(d["output_hashes"]),
            started_at=parse_timestamp(d["started_at"]),
            finished_at=parse_timestamp(d["finished_at"]),
            error=d.get("error"),
            bound=tuple(d.get("bound", [])),
        )


@dataclass(frozen=True)
class RunRecord:
    id: str
    pipeline_id: str
    experiment_id: str
    steps: tuple  # of StepRecord
    status: str

    kind = "run"

    def to_record(self):
        return {
            "id": self.id,
            "pipeline_id": self.pipeline_id,
            "experiment_id": self.experiment_id,
            "steps": [s.to_record() for s in self.steps],
            "status": self.status,
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            id=d["id"],
            pipeline_id=d["pipeline_id"],
            experiment_id=d["experiment_id"],
            steps=tuple(StepRecord.from_record(s) for s in d["steps"]),
            status=d["status"],
        )


RECORD_CLASSES = {
    "dataset": Dataset,
    "release": Release,
    "item": Item,
    "annotation": Annotation,
    "profile": Profile,
    "action": Action,
    "artefact": Artefact,
    "experiment": Experiment,
    "tag": Tag,
    "validation": ValidationRecord,
    "catalogue_assignment": CatalogueAssignment,
    "pipeline": Pipeline,
    "run": RunRecord,
}


def record_from_body(kind: str, body: dict):
    cls = RECORD_CLASSES.get(kind)
    if cls is None:
        raise KeyError(f"unknown record kind {kind!r}")
    return cls.from_record(body)


# --- validation ---------------------------------------------------------
#
# validate_entity returns violations as data, never raises. Referential
# rules only apply when a catalog view is supplied (the store, or a batch
# overlay during a unit of work).


def _exists(catalog, ref_id) -> bool:
    return catalog is not None and catalog.get_any(ref_id) is not None


def _member_exists(catalog, member_id) -> bool:
    return catalog is not None and catalog.find_member(member_id) is not None


def _validate_member(m: Member, prefix=""):
    out = []
    if m.seniority not in SENIORITIES:
        out.append(f"{prefix}seniority: must be one of {SENIORITIES}")
    if not m.name:
        out.append(f"{prefix}name: member name non-empty")
    return out


def validate_entity(record, catalog=None):
    """Check a record against its type invariants; violations name field and rule."""
    v = []
    if isinstance(record, Dataset):
        if not record.name:
            v.append("name: dataset name non-empty")
    elif isinstance(record, Release):
        if record.version < 1:
            v.append("version: must be >= 1")
        if record.size_bytes < 0:
            v.append("size_bytes: must be non-negative")
        if record.content_kind not in CONTENT_KINDS:
            v.append(f"content_kind: must be one of {CONTENT_KINDS}")
        if not is_digest(record.content_hash):
            v.append("content_hash: not a 64-hex digest")
        if record.provenance.kind not in ("external", "derived"):
            v.append("provenance: kind must be external or derived")
        if catalog is not None:
            if not _exists(catalog, record.dataset_id):
                v.append("dataset_id: missing parent dataset")
            if record.provenance.kind == "derived" and not _exists(
                catalog, record.provenance.ref
            ):
                v.append("provenance: derived action_id does not exist")
    elif isinstance(record, Item):
        if record.ordinal < 0:
            v.append("ordinal: must be >= 0")
        if catalog is not None:
            if not _exists(catalog, record.release_id):
                v.append("release_id: missing parent release")
            else:
                other = catalog.item_at(record.release_id, record.ordinal)
                if other is not None and other.id != record.id:
                    v.append("ordinal: (release_id, ordinal) already taken")
    elif isinstance(record, Annotation):
        if not record.body:
            v.append("body: annotation body non-empty")
        if record.kind_of_body not in ANNOTATION_KINDS:
            v.append(f"kind_of_body: must be one of {ANNOTATION_KINDS}")
        if catalog is not None:
            if not _exists(catalog, record.item_id):
                v.append("item_id: missing item")
            if not _member_exists(catalog, record.author_id):
                v.append("author_id: missing member")
    elif isinstance(record, Profile):
        for col in record.columns:
            if col.inferred_type not in COLUMN_TYPES:
                v.append(f"columns.{col.name}: bad inferred_type {col.inferred_type!r}")
            if col.null_count > record.record_count:
                v.append(f"columns.{col.name}: null_count exceeds record_count")
            if col.histogram:
                total = sum(count for _, count in col.histogram)
                if total != record.record_count - col.null_count:
                    v.append(f"columns.{col.name}: histogram counts do not sum to non-null count")
    elif isinstance(record, Action):
        if record.kind_of_step not in ACTION_KINDS:
            v.append(f"kind_of_step: must be one of {ACTION_KINDS}")
        if record.status not in ACTION_STATUSES:
            v.append(f"status: must be one of {ACTION_STATUSES}")
        if not record.operation:
            v.append("operation: non-empty")
        if record.finished_at < record.started_at:
            v.append("finished_at: must be >= started_at")
        if catalog is not None:
            if not _exists(catalog, record.experiment_id):
                v.append("experiment_id: missing experiment")
            for ref in record.inputs:
                if not _exists(catalog, ref):
                    v.append(f"inputs: missing record {ref}")
            for ref in record.outputs:
                if not _exists(catalog, ref):
                    v.append(f"outputs: missing record {ref}")
    elif isinstance(record, Artefact):
        if not is_digest(record.blob_hash):
            v.append("blob_hash: not a 64-hex digest")
        for key, value in record.metrics.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                v.append(f"metrics.{key}: must be numeric")
        if catalog is not None:
            if not _exists(catalog, record.action_id):
                v.append("action_id: missing action")
            if is_digest(record.blob_hash) and not catalog.has_blob(record.blob_hash):
                v.append("blob_hash: blob missing from store")
    elif isinstance(record, Experiment):
        if not record.research_question:
            v.append("research_question: non-empty")
        if not record.team:
            v.append("team: non-empty")
        for m in record.team:
            v.extend(_validate_member(m, prefix=f"team.{m.id}."))
        if record.cycle < 1:
            v.append("cycle: must be >= 1")
        if record.status not in EXPERIMENT_STATUSES:
            v.append(f"status: must be one of {EXPERIMENT_STATUSES}")
        if record.status == "published" and not record.has_senior():
            v.append("status: publishing requires at least one senior member")
        if catalog is not None:
            prior = getattr(catalog, "get_prior", catalog.get_any)(record.id)
            if isinstance(prior, Experiment) and record.cycle < prior.cycle:
                v.append("cycle: increments only forward")
    elif isinstance(record, Member):
        v.extend(_validate_member(record))
    elif isinstance(record, Tag):
        if record.origin not in TAG_ORIGINS:
            v.append(f"origin: must be one of {TAG_ORIGINS}")
        if record.origin == "algorithmic":
            if record.confidence is None:
                v.append("confidence: required for algorithmic tags")
            elif not (0.0 <= record.confidence <= 1.0):
                v.append("confidence: confidence outside [0,1]")
        elif record.confidence is not None:
            v.append("confidence: not allowed for user tags")
        if not record.label:
            v.append("label: non-empty")
        if catalog is not None:
            if not _exists(catalog, record.target):
                v.append("target: missing target record")
            if not _exists(catalog, record.experiment_id):
                v.append("experiment_id: missing experiment")
            if record.origin == "user" and not _member_exists(catalog, record.author):
                v.append("author: user tags require an existing member")
    elif isinstance(record, ValidationRecord):
        if record.verdict not in VERDICTS:
            v.append(f"verdict: must be one of {VERDICTS}")
        if catalog is not None:
            if not _exists(catalog, record.target):
                v.append("target: missing target record")
            if not _member_exists(catalog, record.validator):
                v.append("validator: missing member")
    elif isinstance(record, CatalogueAssignment):
        if record.size_bucket not in SIZE_BUCKETS:
            v.append(f"size_bucket: must be one of {SIZE_BUCKETS}")
        if catalog is not None and not _exists(catalog, record.release_id):
            v.append("release_id: missing release")
    elif isinstance(record, Pipeline):
        seen = 0
        for i, step in enumerate(record.steps):
            if not step.op:
                v.append(f"steps[{i}].op: non-empty")
            for token in step.bind:
                if token.startswith("step:") and int(token.split(":", 1)[1]) >= seen + 0:
                    # forward/self references are rejected at define time; here
                    # only structural sanity is enforced
                    if int(token.split(":", 1)[1]) >= i:
                        v.append(f"steps[{i}].bind: references step not earlier than itself")
            seen = i
    elif isinstance(record, RunRecord):
        if record.status not in RUN_STATUSES:
            v.append(f"status: must be one of {RUN_STATUSES}")
        if catalog is not None:
            if not _exists(catalog, record.pipeline_id):
                v.append("pipeline_id: missing pipeline")
            if not _exists(catalog, record.experiment_id):
                v.append("experiment_id: missing experiment")
    else:
        v.append(f"record: unsupported type {type(record).__name__}")
    return v
