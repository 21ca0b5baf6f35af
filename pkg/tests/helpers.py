"""Shared builders for synthetic catalog records."""

from datetime import datetime, timezone

from expcurate.metamodel import content_hash, new_id
from expcurate.metamodel.types import (
    Action,
    Dataset,
    Experiment,
    ExperimentSettings,
    Member,
    Provenance,
    Release,
)

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def make_dataset(name="d", **kw):
    return Dataset(
        id=kw.get("id") or new_id("ds"),
        name=name,
        description=kw.get("description", ""),
        domain=kw.get("domain", "testing"),
        created_at=kw.get("created_at", T0),
    )


def make_release(dataset_id, version=1, payload=b"payload", **kw):
    return Release(
        id=kw.get("id") or new_id("rel"),
        dataset_id=dataset_id,
        version=version,
        license=kw.get("license", "CC0"),
        size_bytes=len(payload),
        provenance=kw.get("provenance", Provenance(kind="external", ref="test")),
        content_kind=kw.get("content_kind", "tabular"),
        content_hash=kw.get("content_hash", content_hash(payload)),
        created_at=kw.get("created_at", T0),
        profile_id=kw.get("profile_id"),
    )


def make_member(seniority="senior", name="Sam", **kw):
    return Member(
        id=kw.get("id") or new_id("mem"),
        name=name,
        role=kw.get("role", "analyst"),
        seniority=seniority,
        responsibilities=tuple(kw.get("responsibilities", [])),
    )


def make_experiment(team=None, **kw):
    return Experiment(
        id=kw.get("id") or new_id("exp"),
        name=kw.get("name", "exp"),
        research_question=kw.get("research_question", "does it work?"),
        date=kw.get("date", T0),
        team=tuple(team if team is not None else [make_member()]),
        settings=kw.get("settings", ExperimentSettings()),
        cycle=kw.get("cycle", 1),
        status=kw.get("status", "draft"),
    )


def make_action(experiment_id, inputs=(), outputs=(), **kw):
    return Action(
        id=kw.get("id") or new_id("act"),
        experiment_id=experiment_id,
        kind_of_step=kw.get("kind_of_step", "automated"),
        operation=kw.get("operation", "op"),
        parameters=kw.get("parameters", {}),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        executor=kw.get("executor", "tool"),
        evaluation=kw.get("evaluation", {}),
        validation_protocol=kw.get("validation_protocol", ""),
        started_at=kw.get("started_at", T0),
        finished_at=kw.get("finished_at", T0),
        status=kw.get("status", "succeeded"),
    )
