"""HTTP surface over one open store.

Every response is canonical JSON wrapped in the standard envelope:
{"status": "ok", "data": ...} or {"status": "error", "error": {code, message}}.
Reads run concurrently; mutations serialize through the store's writer lock.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response

from expcurate import curate, orchestrate
from expcurate.analytics import (
    agreement,
    compile_bulletin,
    confidence_histogram,
    export_results,
    pair_label_vectors,
    query_items,
)
from expcurate.analytics.bulletin import BULLETIN_STRUCTURE
from expcurate.analytics.tables import ResultTable
from expcurate.errors import (
    CurationError,
    NotTeamMember,
    SeniorRequired,
    StaleHistory,
    UnknownBlob,
    UnknownNode,
    UnknownRecord,
    UnknownTarget,
)
from expcurate.ingest import extract_tabular, load_release, read_xsac, release_trace
from expcurate.ingest.loader import create_dataset
from expcurate.metamodel import canonical_encode, decode_canonical
from expcurate.metamodel.lineage import lineage_ancestors
from expcurate.metamodel.types import Experiment, Release
from expcurate.service.schemas import (
    ExperimentCreate,
    IngestRequest,
    RunRequest,
    TagCreate,
    ValidationCreate,
)

DEFAULT_LIMIT = 100

_STATUS_BY_CODE = {
    "UNKNOWN_NODE": 404,
    "UNKNOWN_RECORD": 404,
    "UNKNOWN_TARGET": 404,
    "UNKNOWN_BLOB": 404,
    "MISSING_BLOB": 404,
    "SENIOR_REQUIRED": 403,
    "NOT_TEAM_MEMBER": 403,
    "STALE_HISTORY": 409,
    "PATH_OCCUPIED": 409,
    "STORE_LOCKED": 409,
}


def _envelope(payload, status_code=200) -> Response:
    return Response(
        content=canonical_encode(payload),
        media_type="application/json",
        status_code=status_code,
    )


def ok(data, status_code=200) -> Response:
    return _envelope({"status": "ok", "data": data}, status_code)


def fail(code, message, status_code) -> Response:
    return _envelope(
        {"status": "error", "error": {"code": code, "message": message}}, status_code
    )


def _page(entries, offset, limit):
    return entries[offset : offset + limit]


def create_app(store) -> FastAPI:
    app = FastAPI(title="expcurate", version="0.1.0")

    @app.exception_handler(CurationError)
    async def _domain_error(request: Request, exc: CurationError):
        return fail(exc.code, str(exc), _STATUS_BY_CODE.get(exc.code, 400))

    # --- experiments ------------------------------------------------------

    @app.get("/experiments")
    def list_experiments(offset: int = 0, limit: int = DEFAULT_LIMIT):
        return ok([e.to_record() for e in _page(store.experiments(), offset, limit)])

    @app.get("/experiments/{experiment_id}")
    def get_experiment(experiment_id: str):
        return ok(store.require(experiment_id, Experiment).to_record())

    @app.post("/experiments")
    def post_experiment(body: ExperimentCreate):
        created = curate.create_experiment(
            store,
            name=body.name,
            research_question=body.research_question,
            date=body.date,
            team=[m.model_dump() for m in body.team],
            settings=body.settings.model_dump() if body.settings else None,
        )
        return ok(
            {"experiment": created.experiment.to_record(), "warnings": list(created.warnings)},
            status_code=201,
        )

    # --- datasets and ingestion -------------------------------------------

    @app.get("/datasets")
    def list_datasets(offset: int = 0, limit: int = DEFAULT_LIMIT):
        return ok([d.to_record() for d in _page(store.datasets(), offset, limit)])

    @app.get("/datasets/{dataset_id}/releases")
    def dataset_releases(dataset_id: str, offset: int = 0, limit: int = DEFAULT_LIMIT):
        store.require(dataset_id)
        out = []
        for release in _page(store.releases_of(dataset_id), offset, limit):
            rec = release.to_record()
            catalogue = store.catalogue_of(release.id)
            if catalogue is not None:
                rec["catalogue"] = catalogue.to_record()
            out.append(rec)
        return ok(out)

    @app.post("/ingest")
    def post_ingest(body: IngestRequest):
        dataset = store.get_any(body.dataset) or store.dataset_by_name(body.dataset)
        if dataset is None:
            dataset = create_dataset(store, body.dataset, domain=body.domain)
        if body.csv_text is not None:
            staged = extract_tabular(
                body.csv_text.encode("utf-8"), delimiter=body.delimiter, quote=body.quote
            )
        elif body.xsac_text is not None:
            staged = read_xsac(body.xsac_text.encode("utf-8"))
        elif body.texts is not None:
            staged = list(body.texts)
        else:
            return fail("VALIDATION_FAILED", "one of csv_text/xsac_text/texts required", 400)
        from expcurate.metamodel.types import Provenance

        result = load_release(
            store,
            dataset.id,
            staged,
            content_kind=body.content_kind,
            license=body.license,
            provenance=Provenance(kind="external", ref=body.source),
            external_id_column=body.external_id_column,
            media_hash_column=body.media_hash_column,
        )
        return ok(
            {
                "release": result.release.to_record(),
                "profile": result.profile.to_record(),
                "catalogue": result.catalogue.to_record(),
                "items": len(result.items),
            },
            status_code=201,
        )

    @app.get("/releases/{release_id}/profile")
    def release_profile(release_id: str):
        release = store.require(release_id, Release)
        profile = store.get_profile(release)
        return ok(profile.to_record() if profile else None)

    @app.get("/releases/{release_id}/signal")
    def release_signal(release_id: str):
        release = store.require(release_id, Release)
        if release.content_kind != "signal":
            return fail("VALIDATION_FAILED", f"{release_id} is not a signal release", 400)
        trace = release_trace(store, release)
        intervals = []
        for artefact in store.artefacts():
            if artefact.structure != "trigger-intervals":
                continue
            action = store.get_any(artefact.action_id)
            if action is not None and release_id in action.inputs:
                body = decode_canonical(store.get_blob(artefact.blob_hash))
                intervals.extend(body["intervals"])
        return ok(
            {
                "station_id": trace.station_id,
                "channel_id": trace.channel_id,
                "axis": trace.axis,
                "sample_rate_hz": trace.sample_rate_hz,
                "start_time": release.to_record()["created_at"],
                "samples": list(trace.samples),
                "trigger_intervals": intervals,
            }
        )

    # --- pipelines and runs -------------------------------------------------

    @app.post("/pipelines/{pipeline_id}/run")
    def run_pipeline(pipeline_id: str, body: RunRequest):
        run, _ = orchestrate.run_pipeline(
            store, pipeline_id, body.experiment_id, inputs=body.inputs or None
        )
        return ok(run.to_record(), status_code=201)

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        from expcurate.metamodel.types import RunRecord

        return ok(store.require(run_id, RunRecord).to_record())

    @app.post("/runs/{run_id}/replay")
    def post_replay(run_id: str):
        return ok(orchestrate.replay(store, run_id).to_record())

    # --- items and tagging ---------------------------------------------------

    @app.get("/items")
    def get_items(
        release: str = None,
        experiment: str = None,
        filter: str = None,
        offset: int = 0,
        limit: int = DEFAULT_LIMIT,
    ):
        scope = release or experiment
        if scope is None:
            return fail("VALIDATION_FAILED", "release or experiment scope required", 400)
        expr = json.loads(filter) if filter else None
        views = query_items(store, scope, expr)
        data = []
        for view in _page(views, offset, limit):
            data.append(
                {
                    "item": view.item.to_record(),
                    "cells": view.cells,
                    "text": view.text,
                }
            )
        return ok({"total": len(views), "items": data})

    @app.post("/tags")
    def post_tag(body: TagCreate):
        tag = curate.apply_user_tag(
            store, body.item_id, body.label, body.member_id, body.experiment_id
        )
        return ok(tag.to_record(), status_code=201)

    @app.post("/validations")
    def post_validation(body: ValidationCreate):
        record = curate.review(
            store,
            body.target,
            body.member_id,
            body.verdict,
            comment=body.comment,
            expected_seq=body.expected_seq,
        )
        return ok(record.to_record(), status_code=201)

    @app.get("/tags/{target}/history")
    def get_history(target: str):
        entries = curate.tag_history(store, target)
        out = []
        for entry in entries:
            rec = entry.to_record()
            rec["entry_kind"] = entry.kind
            out.append(rec)
        return ok({"seq": len(entries), "entries": out})

    @app.get("/review-queue")
    def review_queue(experiment: str, offset: int = 0, limit: int = DEFAULT_LIMIT):
        store.require(experiment, Experiment)
        pending = []
        for tag in store.tags():
            if tag.experiment_id != experiment:
                continue
            if curate.effective_verdict(store, tag.id) is None:
                pending.append(tag)
        pending.sort(key=lambda t: t.created_at)
        return ok(
            {
                "total": len(pending),
                "pending": [t.to_record() for t in _page(pending, offset, limit)],
            }
        )

    # --- lineage ----------------------------------------------------------------

    @app.get("/lineage/{node_id}")
    def get_lineage(node_id: str):
        graph = orchestrate.store_lineage(store)
        if node_id not in graph.nodes:
            raise UnknownNode(node_id)
        ancestors = lineage_ancestors(graph, node_id)
        edges = sorted([list(e) for e in graph.edges if e[0] in ancestors | {node_id} and e[1] in ancestors | {node_id}])
        return ok({"node": node_id, "ancestors": sorted(ancestors), "edges": edges})

    # --- analytics -----------------------------------------------------------------

    @app.get("/analytics/agreement")
    def get_agreement(experiment: str, a: str, b: str):
        labels_a, labels_b, items = pair_label_vectors(store, experiment, a, b)
        result = agreement(labels_a, labels_b)
        rec = result.to_record()
        rec["items"] = items
        return ok(rec)

    @app.get("/analytics/confidence-histogram")
    def get_histogram(experiment: str, author: str = None):
        tags = [
            t
            for t in store.tags()
            if t.experiment_id == experiment and (author is None or t.author == author)
        ]
        return ok(confidence_histogram(tags).to_record())

    @app.get("/analytics/tags-by-annotator")
    def tags_by_annotator(experiment: str):
        counts = {}
        for tag in store.tags():
            if tag.experiment_id == experiment:
                counts[tag.author] = counts.get(tag.author, 0) + 1
        members = {m.id: m for e in store.experiments() for m in e.team}
        rows = []
        for author in sorted(counts, key=lambda a: (-counts[a], a)):
            member = members.get(author)
            rows.append(
                {
                    "author": author,
                    "name": member.name if member else author,
                    "seniority": member.seniority if member else "tool",
                    "tags": counts[author],
                }
            )
        return ok(rows)

    # --- bulletins and export ---------------------------------------------------------

    @app.get("/bulletins/{experiment_id}")
    def get_bulletin(experiment_id: str):
        store.require(experiment_id, Experiment)
        latest = None
        for artefact in store.artefacts():
            if artefact.structure != BULLETIN_STRUCTURE:
                continue
            action = store.get_any(artefact.action_id)
            if action is not None and action.experiment_id == experiment_id:
                latest = artefact
        if latest is None:
            raise UnknownRecord(f"no bulletin for {experiment_id}")
        return ok(decode_canonical(store.get_blob(latest.blob_hash)))

    @app.post("/bulletins/{experiment_id}")
    def post_bulletin(experiment_id: str):
        result = compile_bulletin(store, experiment_id)
        return ok(result.bulletin, status_code=201)

    @app.get("/export")
    def get_export(format: str, release: str):
        rel = store.require(release, Release)
        from expcurate.ingest.loader import release_table

        table = release_table(store, rel)
        result = ResultTable(columns=table.header, rows=table.rows)
        payload = export_results(result, format)
        media = "text/csv" if format == "csv" else "application/json"
        return Response(content=payload, media_type=media)

    # --- store health ------------------------------------------------------------------

    @app.get("/check")
    def get_check():
        return ok(orchestrate.consistency_check(store).to_record())

    return app


def serve(store, bind_address="127.0.0.1:8787"):
    """Run the service until interrupted; BindFailed surfaces as OSError."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    uvicorn.run(create_app(store), host=host or "127.0.0.1", port=int(port or 8787))
