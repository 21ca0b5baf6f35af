"""Bulletin compilation: the senior-validated summary of located events."""

from __future__ import annotations

from dataclasses import dataclass

from expcurate.metamodel import canonical_encode, decode_canonical, format_timestamp, new_id
from expcurate.metamodel.types import Action, Artefact
from expcurate.analytics.seismic import EVENT_STRUCTURE
from expcurate.curate import effective_verdict
from expcurate.store import Store

BULLETIN_STRUCTURE = "bulletin"


@dataclass(frozen=True)
class BulletinResult:
    artefact: Artefact
    action: Action
    bulletin: dict


def experiment_events(store: Store, experiment_id):
    """located-event artefacts of an experiment, in catalog order."""
    events = []
    for artefact in store.artefacts():
        if artefact.structure != EVENT_STRUCTURE:
            continue
        action = store.get_any(artefact.action_id)
        if action is not None and action.experiment_id == experiment_id:
            events.append(artefact)
    return events


def compile_bulletin(store: Store, experiment_id, executor=None) -> BulletinResult:
    """Only events whose latest senior verdict is `accepted` make the bulletin."""
    store.require(experiment_id)
    entries = []
    for artefact in experiment_events(store, experiment_id):
        verdict = effective_verdict(store, artefact.id, senior_only=True)
        if verdict is None or verdict.verdict != "accepted":
            continue
        body = decode_canonical(store.get_blob(artefact.blob_hash))
        entries.append(
            {
                "event_id": artefact.id,
                "stations": body["stations"],
                "year": int(body["year"]),
                "magnitude": body["magnitude"],
                "epicenter": body["epicenter"],
                "residual_rms_km": body["residual_rms_km"],
                "validated_by": verdict.validator,
            }
        )
    bulletin = {
        "experiment_id": experiment_id,
        "generated_at": format_timestamp(store.next_timestamp()),
        "events": entries,
    }
    blob = canonical_encode(bulletin)
    digest = store.put_blob(blob)
    started = store.next_timestamp()
    action_id = new_id("act")
    artefact = Artefact(
        id=new_id("art"),
        action_id=action_id,
        structure=BULLETIN_STRUCTURE,
        metrics={"events": len(entries)},
        blob_hash=digest,
    )
    action = Action(
        id=action_id,
        experiment_id=experiment_id,
        kind_of_step="automated",
        operation="compile_bulletin",
        parameters={},
        inputs=tuple(e["event_id"] for e in entries),
        outputs=(artefact.id,),
        executor=executor or "compile_bulletin",
        evaluation={"events": len(entries)},
        validation_protocol="senior acceptance required per event",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([artefact, action])
    return BulletinResult(artefact=artefact, action=action, bulletin=bulletin)
