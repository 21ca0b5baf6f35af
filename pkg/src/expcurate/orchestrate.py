"""Pipeline orchestration: declarative step lists over the registered
operations, run recording, deterministic replay, and store-wide consistency.

Every step's inputs and outputs are content-hashed; the hashes land in the
RunRecord and every one of them resolves to a blob. Replay re-executes the
recorded steps with the recorded parameters and seeds against a throwaway
clone of the store and compares the hashes byte-for-byte, so nothing a
replay does can touch the real catalog.

Seeding: a stochastic step receives
int(sha256(f"{run_id}:{step_index}")[:16 hex], 16), 64 bits derived from
the run id, so re-execution is reproducible without global state.
"""

from __future__ import annotations

import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from expcurate.errors import (
    CurationError,
    CycleDetected,
    ForwardReference,
    MissingBlob,
    UnknownOperation,
)
from expcurate.metamodel import (
    canonical_encode,
    content_hash,
    decode_canonical,
    format_decimal,
    new_id,
)
from expcurate.metamodel.lineage import build_lineage
from expcurate.metamodel.types import (
    Action,
    Artefact,
    Experiment,
    Pipeline,
    PipelineStep,
    Release,
    RunRecord,
    StepRecord,
)
from expcurate import curate
from expcurate.analytics.cluster import kmeans
from expcurate.analytics.seismic import PhasePick, record_event, sta_lta_detect
from expcurate.ingest.enrich import enrich, rules_from_params
from expcurate.ingest.loader import load_release, release_trace
from expcurate.ingest.signal import read_xsac, write_xsac
from expcurate.ingest.tabular import StagedTable, clean_dedupe, extract_tabular, table_to_payload
from expcurate.store import Store, open_store


def derive_seed(run_id: str, step_index: int) -> int:
    return int(content_hash(f"{run_id}:{step_index}".encode("utf-8"))[:16], 16)


@dataclass
class RunContext:
    store: Store
    experiment_id: str
    pipeline_id: str
    run_id: str
    step_index: int = 0

    @property
    def executor(self):
        return f"pipeline:{self.pipeline_id}"

    @property
    def seed(self):
        return derive_seed(self.run_id, self.step_index)


@dataclass(frozen=True)
class BoundInput:
    token: str
    value: object
    digest: str


@dataclass
class StepOutcome:
    value: object = None
    digest_bytes: bytes = b""
    action: Optional[Action] = None
    evaluation: dict = field(default_factory=dict)

    @property
    def digest(self):
        return content_hash(self.digest_bytes)


# --- registered operations ---------------------------------------------------


def _op_extract_tabular(ctx, params, bound):
    table = extract_tabular(
        bound[0].value,
        delimiter=params.get("delimiter", ","),
        quote=params.get("quote", '"'),
        source_uri=params.get("source_uri", ""),
    )
    return StepOutcome(value=table, digest_bytes=table_to_payload(table))


def _op_extract_signal(ctx, params, bound):
    trace = read_xsac(bound[0].value)
    return StepOutcome(value=trace, digest_bytes=write_xsac(trace))


def _op_clean_dedupe(ctx, params, bound):
    table, report = clean_dedupe(bound[0].value, params["key_columns"])
    return StepOutcome(
        value=table,
        digest_bytes=table_to_payload(table),
        evaluation={"removed": report.removed, "kept": report.kept},
    )


def _op_enrich(ctx, params, bound):
    table, report = enrich(bound[0].value, rules_from_params(params))
    return StepOutcome(
        value=table,
        digest_bytes=table_to_payload(table),
        evaluation={
            "resolved": report.time_resolved,
            "unresolved": report.time_unresolved,
        },
    )


def _resolve_dataset(store, token):
    ds = store.get_any(token)
    if ds is not None:
        return ds
    ds = store.dataset_by_name(token)
    if ds is None:
        raise CurationError(f"unknown dataset {token!r}")
    return ds


def _op_load_release(ctx, params, bound):
    dataset = _resolve_dataset(ctx.store, params["dataset"])
    from expcurate.metamodel.types import Provenance

    result = load_release(
        ctx.store,
        dataset.id,
        bound[0].value,
        content_kind=params["content_kind"],
        license=params.get("license", "unspecified"),
        provenance=Provenance(kind="external", ref=params.get("source", "pipeline input")),
        external_id_column=params.get("external_id_column"),
        media_hash_column=params.get("media_hash_column"),
    )
    return StepOutcome(
        value=result.release,
        digest_bytes=ctx.store.get_blob(result.release.content_hash),
        evaluation={"version": result.release.version},
    )


def _require_release(ctx, bound_input):
    value = bound_input.value
    if isinstance(value, Release):
        return value
    raise CurationError(f"step input {bound_input.token!r} is not a release")


def _op_map_headers(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    result = curate.map_headers(
        ctx.store,
        release.id,
        params["mapping"],
        ctx.experiment_id,
        absent=tuple(params.get("absent", [])),
        executor=ctx.executor,
    )
    return StepOutcome(
        value=result.release,
        digest_bytes=ctx.store.get_blob(result.release.content_hash),
        action=result.action,
    )


def _op_normalize_geotemporal(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    result = curate.normalize_geotemporal(
        ctx.store, release.id, rules_from_params(params), ctx.experiment_id,
        executor=ctx.executor,
    )
    return StepOutcome(
        value=result.release,
        digest_bytes=ctx.store.get_blob(result.release.content_hash),
        action=result.action,
        evaluation=dict(result.action.evaluation),
    )


def _op_prepare_features(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    result = curate.prepare_features(
        ctx.store, release.id, params["columns"], ctx.experiment_id, executor=ctx.executor
    )
    return StepOutcome(
        value=result.artefact,
        digest_bytes=ctx.store.get_blob(result.artefact.blob_hash),
        action=result.action,
        evaluation={"dropped_rows": result.dropped_rows},
    )


def _item_keys(store, release_id):
    return {
        item.id: item.external_id if item.external_id is not None else str(item.ordinal)
        for item in store.items_of(release_id)
    }


def _op_apply_rule_tags(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    ruleset = curate.TagRuleSet.from_record(params["ruleset"])
    result = curate.apply_rule_tags(
        ctx.store, release.id, ruleset, ctx.experiment_id,
        text_column=params.get("text_column") or None,
        executor=ctx.executor,
    )
    keys = _item_keys(ctx.store, release.id)
    entries = sorted(
        [keys[t.target], t.label, format_decimal(t.confidence)] for t in result.tags
    )
    return StepOutcome(
        value=result.tags,
        digest_bytes=canonical_encode({"tags": entries}),
        action=result.action,
        evaluation=dict(result.action.evaluation),
    )


def _op_import_labels(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    rows = [[e[0], e[1], str(e[2])] for e in params["labels"]]
    tags, action = curate.import_labels(
        ctx.store, release.id, rows, params["author"], ctx.experiment_id,
        executor=ctx.executor,
    )
    keys = _item_keys(ctx.store, release.id)
    entries = sorted([keys[t.target], t.label, format_decimal(t.confidence)] for t in tags)
    return StepOutcome(
        value=tags,
        digest_bytes=canonical_encode({"labels": entries}),
        action=action,
    )


def _op_batch_review(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    records, action = curate.batch_review(
        ctx.store, release.id, params["verdicts"], params["validator"],
        ctx.experiment_id, executor=ctx.executor,
    )
    entries = sorted([e["item"], e["verdict"]] for e in params["verdicts"])
    return StepOutcome(
        value=records,
        digest_bytes=canonical_encode({"validator": params["validator"], "verdicts": entries}),
        action=action,
        evaluation=dict(action.evaluation),
    )


def _op_sta_lta_detect(ctx, params, bound):
    release = _require_release(ctx, bound[0])
    trace = release_trace(ctx.store, release)
    intervals = sta_lta_detect(
        trace,
        float(params["sta_s"]),
        float(params["lta_s"]),
        float(params["on_ratio"]),
        float(params["off_ratio"]),
    )
    blob = canonical_encode(
        {
            "station_id": trace.station_id,
            "channel_id": trace.channel_id,
            "axis": trace.axis,
            "intervals": [[int(s), int(e)] for s, e in intervals],
        }
    )
    digest = ctx.store.put_blob(blob)
    action_id = new_id("act")
    started = ctx.store.next_timestamp()
    artefact = Artefact(
        id=new_id("art"),
        action_id=action_id,
        structure="trigger-intervals",
        metrics={"triggers": len(intervals)},
        blob_hash=digest,
    )
    action = Action(
        id=action_id,
        experiment_id=ctx.experiment_id,
        kind_of_step="automated",
        operation="sta_lta_detect",
        parameters=dict(params),
        inputs=(release.id,),
        outputs=(artefact.id,),
        executor=ctx.executor,
        evaluation={"triggers": len(intervals)},
        validation_protocol="",
        started_at=started,
        finished_at=ctx.store.next_timestamp(),
        status="succeeded",
    )
    ctx.store.append_batch([artefact, action])
    return StepOutcome(value=artefact, digest_bytes=blob, action=action)


def _op_locate_event(ctx, params, bound):
    picks = [PhasePick.from_record(p) for p in params["picks"]]
    input_ids = tuple(b.value.id for b in bound if isinstance(b.value, Release))
    result = record_event(
        ctx.store,
        ctx.experiment_id,
        picks,
        year=int(params["year"]),
        magnitude=float(params["magnitude"]),
        vp_km_s=float(params.get("vp_km_s", 6.0)),
        vs_km_s=float(params.get("vs_km_s", 3.5)),
        input_release_ids=input_ids,
        executor=ctx.executor,
    )
    return StepOutcome(
        value=result.artefact,
        digest_bytes=ctx.store.get_blob(result.artefact.blob_hash),
        action=result.action,
        evaluation={"residual_rms_km": result.solution.residual_rms_km},
    )


def _op_kmeans(ctx, params, bound):
    artefact = bound[0].value
    if not isinstance(artefact, Artefact):
        raise CurationError("kmeans expects a feature-matrix artefact input")
    columns, rows = curate.matrix_from_blob(ctx.store.get_blob(artefact.blob_hash))
    k = int(params["k"])
    result = kmeans(rows, k, seed=ctx.seed)
    blob = canonical_encode(
        {
            "k": k,
            "seed": ctx.seed,
            "assignments": list(result.assignments),
            "centroids": [list(c) for c in result.centroids],
            "inertia": result.inertia,
        }
    )
    digest = ctx.store.put_blob(blob)
    action_id = new_id("act")
    started = ctx.store.next_timestamp()
    out = Artefact(
        id=new_id("art"),
        action_id=action_id,
        structure=f"cluster-assignments k={k}",
        metrics={"k": k, "inertia": result.inertia},
        blob_hash=digest,
    )
    action = Action(
        id=action_id,
        experiment_id=ctx.experiment_id,
        kind_of_step="automated",
        operation="kmeans",
        parameters={"k": k, "seed": ctx.seed},
        inputs=(),
        outputs=(out.id,),
        executor=ctx.executor,
        evaluation={"inertia": result.inertia, "iterations": result.iterations},
        validation_protocol="",
        started_at=started,
        finished_at=ctx.store.next_timestamp(),
        status="succeeded",
    )
    ctx.store.append_batch([out, action])
    return StepOutcome(value=out, digest_bytes=blob, action=action)


OPERATIONS = {
    "extract_tabular": _op_extract_tabular,
    "extract_signal": _op_extract_signal,
    "clean_dedupe": _op_clean_dedupe,
    "enrich": _op_enrich,
    "load_release": _op_load_release,
    "map_headers": _op_map_headers,
    "normalize_geotemporal": _op_normalize_geotemporal,
    "prepare_features": _op_prepare_features,
    "apply_rule_tags": _op_apply_rule_tags,
    "import_labels": _op_import_labels,
    "batch_review": _op_batch_review,
    "sta_lta_detect": _op_sta_lta_detect,
    "locate_event": _op_locate_event,
    "kmeans": _op_kmeans,
}

_BIND_PREFIXES = ("path:", "release:", "step:", "input:")


# --- pipeline definition -----------------------------------------------------


def define_pipeline(store: Store, spec) -> Pipeline:
    """Validate a pipeline spec (registered ops, backward-only bindings) and append it."""
    steps = []
    for i, raw in enumerate(spec.get("steps", [])):
        op = raw["op"]
        if op not in OPERATIONS:
            raise UnknownOperation(op)
        for token in raw.get("bind", []):
            if not token.startswith(_BIND_PREFIXES):
                raise CurationError(f"step {i}: unknown binding {token!r}")
            if token.startswith("step:") and int(token.split(":", 1)[1]) >= i:
                raise ForwardReference(f"step {i} binds {token!r}")
        steps.append(
            PipelineStep(op=op, params=raw.get("params", {}), bind=tuple(raw.get("bind", [])))
        )
    pipeline = Pipeline(id=spec.get("id") or new_id("pipe"), steps=tuple(steps))
    store.append(pipeline)
    return pipeline


# --- running -----------------------------------------------------------------


def _resolve_binding(store, token, runtime_inputs, outcomes, recorded_hash=None):
    if token.startswith("input:"):
        name = token.split(":", 1)[1]
        if not runtime_inputs or name not in runtime_inputs:
            raise CurationError(f"missing runtime input {name!r}")
        token = runtime_inputs[name]
    if token.startswith("path:"):
        if recorded_hash is not None:
            return BoundInput(token=token, value=store.get_blob(recorded_hash),
                              digest=recorded_hash)
        data = Path(token.split(":", 1)[1]).read_bytes()
        return BoundInput(token=token, value=data, digest=store.put_blob(data))
    if token.startswith("release:"):
        release = store.require(token.split(":", 1)[1], Release)
        return BoundInput(token=token, value=release, digest=release.content_hash)
    if token.startswith("step:"):
        i = int(token.split(":", 1)[1])
        outcome = outcomes[i]
        if outcome is None:
            raise CurationError(f"step {i} did not execute")
        return BoundInput(token=token, value=outcome.value, digest=outcome.digest)
    raise CurationError(f"unknown binding {token!r}")


def run_pipeline(store: Store, pipeline, experiment_id, inputs=None, replay_of=None):
    """Execute steps in order; each one leaves an Action and hashed outputs.

    A step failure stops the run; what happened so far is recorded, never
    discarded. With replay_of, path-bound inputs come from the recorded
    blobs and seeds derive from the recorded run id.
    """
    if isinstance(pipeline, str):
        pipeline = store.require(pipeline, Pipeline)
    store.require(experiment_id, Experiment)
    run_id = new_id("run")
    seed_source = replay_of.id if replay_of is not None else run_id
    ctx = RunContext(
        store=store, experiment_id=experiment_id, pipeline_id=pipeline.id, run_id=seed_source
    )
    outcomes = [None] * len(pipeline.steps)
    step_records = []
    status = "succeeded"
    for i, step in enumerate(pipeline.steps):
        ctx.step_index = i
        recorded = replay_of.steps[i] if replay_of is not None and i < len(replay_of.steps) else None
        started = store.next_timestamp()
        bound = []
        error = None
        outcome = None
        try:
            tokens = recorded.bound if recorded is not None else step.bind
            for pos, token in enumerate(tokens):
                recorded_hash = (
                    recorded.input_hashes[pos]
                    if recorded is not None and token.startswith("path:")
                    else None
                )
                bound.append(
                    _resolve_binding(store, token, inputs, outcomes, recorded_hash)
                )
            outcome = OPERATIONS[step.op](ctx, step.params, bound)
            outcomes[i] = outcome
        except CurationError as exc:
            error = f"{exc.code}: {exc}"
        except (OSError, ValueError, KeyError) as exc:
            error = f"{type(exc).__name__}: {exc}"
        finished = store.next_timestamp()
        if outcome is not None and outcome.action is not None:
            action = outcome.action
        else:
            action = Action(
                id=new_id("act"),
                experiment_id=experiment_id,
                kind_of_step="automated",
                operation=step.op,
                parameters=dict(step.params),
                inputs=tuple(
                    b.value.id for b in bound if isinstance(b.value, Release)
                ),
                outputs=(),
                executor=ctx.executor,
                evaluation=dict(outcome.evaluation) if outcome else {},
                validation_protocol="",
                started_at=started,
                finished_at=finished,
                status="succeeded" if error is None else "failed",
            )
            store.append(action)
        output_hashes = ()
        if outcome is not None:
            store.put_blob(outcome.digest_bytes)
            output_hashes = (outcome.digest,)
        step_records.append(
            StepRecord(
                op=step.op,
                action_id=action.id,
                input_hashes=tuple(b.digest for b in bound),
                output_hashes=output_hashes,
                started_at=started,
                finished_at=finished,
                error=error,
                bound=tuple(b.token for b in bound),
            )
        )
        if error is not None:
            status = "partial" if i > 0 else "failed"
            break
    run = RunRecord(
        id=run_id,
        pipeline_id=pipeline.id,
        experiment_id=experiment_id,
        steps=tuple(step_records),
        status=status,
    )
    store.append(run)
    return run, outcomes


# --- replay --------------------------------------------------------------------


@dataclass(frozen=True)
class StepComparison:
    op: str
    recorded_hashes: tuple
    replayed_hashes: tuple
    recorded_error: Optional[str]
    replayed_error: Optional[str]

    @property
    def match(self):
        return (
            self.recorded_hashes == self.replayed_hashes
            and self.recorded_error == self.replayed_error
        )

    def to_record(self):
        rec = {
            "op": self.op,
            "recorded_hashes": list(self.recorded_hashes),
            "replayed_hashes": list(self.replayed_hashes),
            "match": self.match,
        }
        if self.recorded_error is not None:
            rec["recorded_error"] = self.recorded_error
        if self.replayed_error is not None:
            rec["replayed_error"] = self.replayed_error
        return rec


@dataclass(frozen=True)
class ReplayReport:
    run_id: str
    identical: bool
    steps: tuple  # of StepComparison
    first_divergence: Optional[int] = None

    def to_record(self):
        rec = {
            "run_id": self.run_id,
            "identical": self.identical,
            "steps": [s.to_record() for s in self.steps],
        }
        if self.first_divergence is not None:
            rec["first_divergence"] = self.first_divergence
        return rec


def replay(store: Store, run_id) -> ReplayReport:
    """Re-execute a recorded run on a throwaway clone and compare step hashes."""
    run = store.require(run_id, RunRecord)
    pipeline = store.require(run.pipeline_id, Pipeline)
    for step in run.steps:
        for digest in step.input_hashes:
            if not store.has_blob(digest):
                raise MissingBlob(digest)
    tmp = tempfile.mkdtemp(prefix="xv-replay-")
    clone_path = Path(tmp) / "clone"
    try:
        shutil.copytree(store.root, clone_path)
        with open_store(clone_path, durable=False) as clone:
            new_run, _ = run_pipeline(
                clone, pipeline, run.experiment_id, replay_of=run
            )
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    comparisons = []
    first_divergence = None
    for i, recorded in enumerate(run.steps):
        replayed = new_run.steps[i] if i < len(new_run.steps) else None
        comparison = StepComparison(
            op=recorded.op,
            recorded_hashes=recorded.output_hashes,
            replayed_hashes=replayed.output_hashes if replayed else (),
            recorded_error=recorded.error,
            replayed_error=replayed.error if replayed else "step not executed",
        )
        comparisons.append(comparison)
        if not comparison.match and first_divergence is None:
            first_divergence = i
    identical = first_divergence is None and len(new_run.steps) == len(run.steps)
    return ReplayReport(
        run_id=run_id,
        identical=identical,
        steps=tuple(comparisons),
        first_divergence=first_divergence,
    )


# --- consistency ---------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    dangling: tuple
    orphan_blobs: tuple
    cycles: tuple
    version_gaps: tuple

    @property
    def is_clean(self):
        return not (self.dangling or self.orphan_blobs or self.cycles or self.version_gaps)

    def to_record(self):
        return {
            "dangling": list(self.dangling),
            "orphan_blobs": list(self.orphan_blobs),
            "cycles": list(self.cycles),
            "version_gaps": list(self.version_gaps),
            "clean": self.is_clean,
        }


def consistency_check(store: Store) -> ConsistencyReport:
    """Dangling references, orphan blobs, lineage cycles and version gaps."""
    dangling = []

    def check(rec_id, field_name, ref):
        if ref and store.get_any(ref) is None:
            dangling.append(f"{rec_id}.{field_name} -> {ref}")

    referenced_blobs = set()
    for release in store.releases():
        check(release.id, "dataset_id", release.dataset_id)
        if release.provenance.kind == "derived":
            check(release.id, "provenance", release.provenance.ref)
        referenced_blobs.add(release.content_hash)
        if release.profile_id:
            referenced_blobs.add(release.profile_id)
    for items in store.index.items_by_release.values():
        for item in items.values():
            check(item.id, "release_id", item.release_id)
            if isinstance(item.payload, dict) and "blob" in item.payload:
                referenced_blobs.add(item.payload["blob"])
    for action in store.actions():
        check(action.id, "experiment_id", action.experiment_id)
        for ref in action.inputs:
            check(action.id, "inputs", ref)
        for ref in action.outputs:
            check(action.id, "outputs", ref)
    for artefact in store.artefacts():
        check(artefact.id, "action_id", artefact.action_id)
        referenced_blobs.add(artefact.blob_hash)
        if not store.has_blob(artefact.blob_hash):
            dangling.append(f"{artefact.id}.blob_hash -> {artefact.blob_hash}")
    for tag in store.tags():
        check(tag.id, "target", tag.target)
        check(tag.id, "experiment_id", tag.experiment_id)
    for validation in store.validations():
        check(validation.id, "target", validation.target)
        if store.find_member(validation.validator) is None:
            dangling.append(f"{validation.id}.validator -> {validation.validator}")
    for annotation in store.annotations():
        check(annotation.id, "item_id", annotation.item_id)
        if annotation.kind_of_body == "media":
            referenced_blobs.add(annotation.body)
    for run in store.runs():
        check(run.id, "pipeline_id", run.pipeline_id)
        check(run.id, "experiment_id", run.experiment_id)
        for step in run.steps:
            for digest in list(step.input_hashes) + list(step.output_hashes):
                referenced_blobs.add(digest)
                if not store.has_blob(digest):
                    dangling.append(f"{run.id}.steps -> blob {digest}")

    orphans = [d for d in store.blob_digests() if d not in referenced_blobs]

    cycles = []
    try:
        build_lineage(store.releases(), store.actions(), store.artefacts())
    except CycleDetected as exc:
        cycles.append(" -> ".join(exc.cycle))

    gaps = []
    for dataset in store.datasets():
        versions = [r.version for r in store.releases_of(dataset.id)]
        if versions != list(range(1, len(versions) + 1)):
            gaps.append(f"{dataset.id}: versions {versions}")

    return ConsistencyReport(
        dangling=tuple(dangling),
        orphan_blobs=tuple(orphans),
        cycles=tuple(cycles),
        version_gaps=tuple(gaps),
    )


def store_lineage(store: Store):
    return build_lineage(store.releases(), store.actions(), store.artefacts())
