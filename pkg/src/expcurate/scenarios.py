"""Bundled demo scenarios: three experiments built end-to-end through the
engine, used by the test suite and by `xv init --with-demo-data`.

* jellyfish sightings (biodiversity): CSV ingest, header mapping,
  geo-temporal cleanup, feature prep and clustering, imported model labels
  with confidences.
* regional seismic monitoring: XSAC traces, STA/LTA detection, analyst
  phase picks, located events, senior-reviewed bulletin.
* graffiti analysis (political science): a 1,050-photo manifest, rule
  tagging, and a senior batch review that accepts exactly 546 items.
"""

from __future__ import annotations

import csv
import io
import json
import tempfile
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from expcurate import curate, orchestrate
from expcurate.analytics.bulletin import compile_bulletin
from expcurate.analytics.seismic import forward_model_picks
from expcurate.ingest import (
    SignalTrace,
    StagedTable,
    create_dataset,
    default_rule_table,
    load_release,
    write_xsac,
)
from expcurate.ingest.enrich import EnrichmentRules, ReliabilityRule, rules_to_params
from expcurate.metamodel import format_timestamp, new_id
from expcurate.store import Store

GEO_RULE_ENTRIES = [
    {"pattern": r.pattern, "kind": r.kind, "resolution": r.resolution}
    for r in default_rule_table().rules
]

SPECIES_MODEL = "species-model-v1"
SEISMIC_MODEL = "autoclass-v1"
POLITICAL_RULESET = "political-indicators"
SIGHTING_RULESET = "sighting-keywords"

# 40 model confidences for the species labels; 24 land in [0.8, 1.0],
# 9 in [0.6, 0.8), and 7 fall below the 0.6 manual-review threshold
SPECIES_CONFIDENCES = [
    0.82, 0.85, 0.88, 0.91, 0.93, 0.95, 0.97, 0.99, 0.84, 0.87, 0.90, 0.92,
    0.94, 0.96, 0.98, 1.00, 0.83, 0.86, 0.89, 0.90, 0.93, 0.95, 0.81, 0.99,
    0.62, 0.65, 0.68, 0.70, 0.72, 0.75, 0.78, 0.79, 0.61,
    0.42, 0.45, 0.50, 0.55,
    0.25, 0.30,
    0.10,
]

GRAFFITI_TOTAL = 1050
GRAFFITI_ACCEPTED = 546

_POLITICAL_CAPTIONS = (
    "mural sobre eleição na parede",
    "frase de protesto pintada no muro",
    "slogan de partido na fachada",
    "chamada para greve geral",
    "voto pintado no viaduto",
)
_OTHER_CAPTIONS = (
    "flor colorida no muro",
    "retrato de músico local",
    "paisagem urbana abstrata",
    "assinatura do artista",
    "personagem de desenho animado",
)


@dataclass
class JellyfishHandles:
    dataset_id: str
    experiment_id: str
    run_id: str
    loaded_release_id: str
    mapped_release_id: str
    final_release_id: str
    features_artefact_id: str
    clusters_artefact_id: str
    senior_id: str
    junior_id: str


@dataclass
class SeismicHandles:
    dataset_id: str
    experiment_id: str
    run_id: str
    trace_release_ids: tuple
    candidates_release_id: str
    event_artefact_ids: tuple
    bulletin_artefact_id: str
    senior_id: str
    junior_id: str


@dataclass
class GraffitiHandles:
    dataset_id: str
    experiment_id: str
    run_id: str
    manifest_release_id: str
    senior_id: str
    junior_id: str


@dataclass
class ScenarioHandles:
    jellyfish: JellyfishHandles
    seismic: SeismicHandles
    graffiti: GraffitiHandles

    @property
    def run_ids(self):
        return (self.jellyfish.run_id, self.seismic.run_id, self.graffiti.run_id)


def build_demo_store(store: Store) -> ScenarioHandles:
    with tempfile.TemporaryDirectory(prefix="xv-demo-src-") as tmp:
        sources = Path(tmp)
        jellyfish = _build_jellyfish(store, sources)
        seismic = _build_seismic(store, sources)
        graffiti = _build_graffiti(store)
    return ScenarioHandles(jellyfish=jellyfish, seismic=seismic, graffiti=graffiti)


# --- jellyfish ---------------------------------------------------------------


def jellyfish_csv_bytes() -> bytes:
    """Instagram-export-style CSV: 12 rows inside the Feb-2023 coastal window,
    36 outside it, 3 vague dates (2 resolvable), 2 broken coordinates, and
    2 exact duplicates."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["ID", "source", "location", "media URL", "caption", "posted"])
    captions = (
        "caravela portuguesa na areia",
        "água viva gigante apareceu",
        "medusa na praia hoje",
        "dia lindo de praia",
    )
    rows = []
    for i in range(12):
        rows.append(
            [
                f"JF-W{i + 1:02d}",
                "instagram",
                f"{-23.5 + i * 0.1:.2f},{-43.5 + i * 0.1:.2f}",
                f"https://example.org/media/w{i + 1}",
                captions[i % 4],
                f"2023-02-{(i % 28) + 1:02d}T10:00:00Z",
            ]
        )
    for i in range(36):
        if i % 2 == 0:  # right place, wrong time
            location = f"{-23.2 - (i % 8) * 0.05:.2f},{-43.2 - (i % 8) * 0.05:.2f}"
            posted = f"2022-0{(i % 8) + 1}-15T09:30:00Z"
        else:  # right time, wrong place
            location = f"{-20.1 - (i % 6) * 0.1:.2f},{-40.2 - (i % 6) * 0.1:.2f}"
            posted = f"2023-02-{(i % 28) + 1:02d}T18:45:00Z"
        rows.append(
            [
                f"JF-O{i + 1:02d}",
                "instagram",
                location,
                f"https://example.org/media/o{i + 1}",
                captions[(i + 1) % 4],
                posted,
            ]
        )
    rows.append(["JF-V01", "instagram", "-23.10,-43.10", "https://example.org/media/v1",
                 captions[0], "last summer"])
    rows.append(["JF-V02", "instagram", "-23.20,-43.20", "https://example.org/media/v2",
                 captions[1], "last winter"])
    rows.append(["JF-V03", "instagram", "-23.30,-43.30", "https://example.org/media/v3",
                 captions[2], "sometime ago"])
    rows.append(["JF-B01", "instagram", "95.00,-43.00", "https://example.org/media/b1",
                 captions[3], "2022-06-01T12:00:00Z"])
    rows.append(["JF-B02", "instagram", "-23.00,200.00", "https://example.org/media/b2",
                 captions[0], "2022-07-01T12:00:00Z"])
    for row in rows:
        writer.writerow(row)
    writer.writerow(rows[0])  # exact duplicates, dropped by clean_dedupe
    writer.writerow(rows[12])
    return buf.getvalue().encode("utf-8")


def species_label_rows(store: Store, release_id):
    items = store.items_of(release_id)
    rows = []
    for item, confidence in zip(items, SPECIES_CONFIDENCES):
        label = "physalia-physalis" if confidence >= 0.6 else "unidentified-cnidarian"
        rows.append([item.external_id, label, str(confidence)])
    return rows


def _build_jellyfish(store: Store, sources: Path) -> JellyfishHandles:
    dataset = create_dataset(
        store, "jellyfish-sightings",
        description="social-media sightings of Physalia physalis along the coast",
        domain="biodiversity",
    )
    created = curate.create_experiment(
        store,
        name="caravelas-coast",
        research_question="where and when do jellyfish swarms reach the coast?",
        date="2023-05-10T00:00:00Z",
        team=[
            {"name": "M. Ribeiro", "role": "biologist", "seniority": "senior",
             "responsibilities": ["category definitions", "validation"]},
            {"name": "A. Souza", "role": "data scientist", "seniority": "junior",
             "responsibilities": ["ingestion", "models"]},
        ],
        settings={
            "selection_criteria": ["coastal posts", "2022-2023 season"],
            "performance_constraints": {"min_model_confidence": 0.6},
            "inclusion_rules": ["hashtag must name the species"],
        },
    )
    experiment = created.experiment
    senior_id = experiment.team[0].id
    junior_id = experiment.team[1].id

    csv_path = sources / "instagram-export.csv"
    csv_path.write_bytes(jellyfish_csv_bytes())

    enrich_params = rules_to_params(
        EnrichmentRules(reliability=(ReliabilityRule("source", "instagram", "B"),))
    )
    normalize_params = rules_to_params(
        EnrichmentRules(
            time_column="posted",
            location_column="location",
            reference=datetime(2023, 5, 10, tzinfo=timezone.utc),
            rule_table=default_rule_table("southern"),
        )
    )
    pipeline = orchestrate.define_pipeline(
        store,
        {
            "steps": [
                {"op": "extract_tabular", "params": {"source_uri": "instagram-export.csv"},
                 "bind": [f"path:{csv_path}"]},
                {"op": "clean_dedupe", "params": {"key_columns": ["ID"]}, "bind": ["step:0"]},
                {"op": "enrich", "params": enrich_params, "bind": ["step:1"]},
                {"op": "load_release",
                 "params": {"dataset": "jellyfish-sightings", "content_kind": "tabular",
                            "license": "CC-BY-4.0", "source": "instagram export",
                            "external_id_column": "ID"},
                 "bind": ["step:2"]},
                {"op": "map_headers",
                 "params": {"mapping": {"ID": "external_id", "source": "source",
                                        "location": "location", "media URL": "media_url"},
                            "absent": []},
                 "bind": ["step:3"]},
                {"op": "normalize_geotemporal", "params": normalize_params, "bind": ["step:4"]},
                {"op": "prepare_features",
                 "params": {"columns": ["resolved_lat", "resolved_lon"]},
                 "bind": ["step:5"]},
                {"op": "kmeans", "params": {"k": 2}, "bind": ["step:6"]},
            ]
        },
    )
    run, outcomes = orchestrate.run_pipeline(store, pipeline, experiment.id)
    if run.status != "succeeded":
        raise RuntimeError(f"jellyfish pipeline failed: {run.steps[-1].error}")
    loaded = outcomes[3].value
    mapped = outcomes[4].value
    final = outcomes[5].value
    features = outcomes[6].value
    clusters = outcomes[7].value

    curate.import_labels(
        store, final.id, species_label_rows(store, final.id), SPECIES_MODEL, experiment.id
    )
    ruleset = curate.TagRuleSet.from_record(
        {
            "name": SIGHTING_RULESET,
            "rules": [
                {"pattern": "caravela", "label": "physalia-sighting", "confidence": 0.9},
                {"pattern": r"água\s?viva|agua\s?viva", "label": "jelly-sighting",
                 "confidence": 0.8},
                {"pattern": "medusa", "label": "jelly-sighting", "confidence": 0.75},
            ],
        }
    )
    curate.apply_rule_tags(store, final.id, ruleset, experiment.id, text_column="caption")
    for item in store.items_of(final.id)[:6]:
        curate.apply_user_tag(store, item.id, "confirmed-sighting", senior_id, experiment.id)
    curate.update_experiment(store, experiment.id, status="active")

    return JellyfishHandles(
        dataset_id=dataset.id,
        experiment_id=experiment.id,
        run_id=run.id,
        loaded_release_id=loaded.id,
        mapped_release_id=mapped.id,
        final_release_id=final.id,
        features_artefact_id=features.id,
        clusters_artefact_id=clusters.id,
        senior_id=senior_id,
        junior_id=junior_id,
    )


# --- seismic -----------------------------------------------------------------


STATIONS = (("ST01", 0.0, 0.0), ("ST02", 50.0, 0.0), ("ST03", 0.0, 50.0))
TRACE_START = datetime(2024, 3, 1, tzinfo=timezone.utc)
TRACE_SAMPLES = 8000
TRACE_RATE_HZ = 100.0
EVENTS = (
    # (epicenter, origin offset s, year, magnitude)
    ((30.0, 40.0), 30.0, 2024, 3.2),
    ((10.0, 15.0), 45.0, 2024, 2.1),
    ((45.0, 25.0), 60.0, 2024, 4.0),
)


def synth_trace(station_id, x_km, y_km, with_burst) -> SignalTrace:
    rng = np.random.default_rng(sum(ord(c) for c in station_id) * 7919)
    samples = rng.normal(0.0, 1.0, TRACE_SAMPLES)
    if with_burst:
        length = 260
        t = np.arange(length)
        burst = 25.0 * np.exp(-t / 90.0) * np.sin(2 * np.pi * 7.0 * t / TRACE_RATE_HZ)
        samples[4950 : 4950 + length] += burst
    return SignalTrace(
        station_id=station_id,
        channel_id="HHZ",
        axis="Z",
        sample_rate_hz=TRACE_RATE_HZ,
        start_time=TRACE_START,
        samples=tuple(float(s) for s in samples),
    )


def _event_pick_params(epicenter, origin_offset_s, picker):
    origin = TRACE_START + timedelta(seconds=origin_offset_s)
    picks = forward_model_picks(
        epicenter, [(sid, x, y) for sid, x, y in STATIONS], origin, picker=picker
    )
    return [p.to_record() for p in picks]


def _build_seismic(store: Store, sources: Path) -> SeismicHandles:
    dataset = create_dataset(
        store, "seismic-traces",
        description="vertical-axis traces from the regional station network",
        domain="seismology",
    )
    created = curate.create_experiment(
        store,
        name="northeast-monitoring",
        research_question="which regional events are natural and which are man-made?",
        date="2024-03-01T00:00:00Z",
        team=[
            {"name": "L. Prado", "role": "senior analyst", "seniority": "senior",
             "responsibilities": ["review", "bulletin publication"]},
            {"name": "R. Farias", "role": "junior analyst", "seniority": "junior",
             "responsibilities": ["event detection", "phase picking"]},
        ],
        settings={"performance_constraints": {"max_residual_rms_km": 5.0}},
    )
    experiment = created.experiment
    senior_id = experiment.team[0].id
    junior_id = experiment.team[1].id

    paths = []
    for i, (sid, x, y) in enumerate(STATIONS):
        trace = synth_trace(sid, x, y, with_burst=(i == 0))
        path = sources / f"{sid.lower()}-hhz-z.xsac"
        path.write_bytes(write_xsac(trace))
        paths.append(path)

    steps = []
    for i, path in enumerate(paths):
        steps.append({"op": "extract_signal", "params": {}, "bind": [f"path:{path}"]})
        steps.append(
            {"op": "load_release",
             "params": {"dataset": "seismic-traces", "content_kind": "signal",
                        "license": "CC0", "source": f"station upload {STATIONS[i][0]}"},
             "bind": [f"step:{2 * i}"]}
        )
    steps.append(
        {"op": "sta_lta_detect",
         "params": {"sta_s": 0.5, "lta_s": 10.0, "on_ratio": 4.0, "off_ratio": 1.5},
         "bind": ["step:1"]}
    )
    for epicenter, offset, year, magnitude in EVENTS:
        steps.append(
            {"op": "locate_event",
             "params": {"picks": _event_pick_params(epicenter, offset, picker=junior_id),
                        "vp_km_s": 6.0, "vs_km_s": 3.5, "year": year,
                        "magnitude": magnitude},
             "bind": ["step:1", "step:3", "step:5"]}
        )
    pipeline = orchestrate.define_pipeline(store, {"steps": steps})
    run, outcomes = orchestrate.run_pipeline(store, pipeline, experiment.id)
    if run.status != "succeeded":
        raise RuntimeError(f"seismic pipeline failed: {run.steps[-1].error}")
    trace_releases = tuple(outcomes[i].value.id for i in (1, 3, 5))
    event_ids = tuple(outcomes[i].value.id for i in (7, 8, 9))

    # candidate-event sheet the analysts classify (10 windows across the network)
    header = ("event_id", "station_id", "window_start", "amplitude_peak")
    rows = []
    for i in range(10):
        rows.append(
            (
                f"ev-{i + 1:02d}",
                STATIONS[i % 3][0],
                format_timestamp(TRACE_START + timedelta(seconds=20 + i * 5)),
                f"{5.0 + i * 0.7:.2f}",
            )
        )
    candidates = load_release(
        store, dataset.id,
        StagedTable(header=header, rows=tuple(rows), source_uri="detection-review-sheet"),
        content_kind="tabular",
        license="CC0",
        external_id_column="event_id",
    )
    human = ["natural"] * 5 + ["anthropogenic"] * 5
    machine = list(human)
    machine[4] = "anthropogenic"  # the one disagreement: 9 of 10 match
    for item, label in zip(store.items_of(candidates.release.id), human):
        curate.apply_user_tag(store, item.id, label, junior_id, experiment.id)
    curate.import_labels(
        store,
        candidates.release.id,
        [[f"ev-{i + 1:02d}", machine[i], str(0.8 + (i % 4) * 0.05)] for i in range(10)],
        SEISMIC_MODEL,
        experiment.id,
    )

    # senior review: two events make the bulletin, the third only has a
    # junior opinion and stays out
    curate.review(store, event_ids[0], senior_id, "accepted", comment="clear quarry blast signature ruled out")
    curate.review(store, event_ids[1], senior_id, "accepted", comment="confirmed natural event")
    curate.review(store, event_ids[2], junior_id, "accepted", comment="looks fine to me")
    bulletin = compile_bulletin(store, experiment.id, executor=senior_id)
    curate.update_experiment(store, experiment.id, status="active")

    return SeismicHandles(
        dataset_id=dataset.id,
        experiment_id=experiment.id,
        run_id=run.id,
        trace_release_ids=trace_releases,
        candidates_release_id=candidates.release.id,
        event_artefact_ids=event_ids,
        bulletin_artefact_id=bulletin.artefact.id,
        senior_id=senior_id,
        junior_id=junior_id,
    )


# --- graffiti -----------------------------------------------------------------


def graffiti_manifest(store: Store) -> StagedTable:
    """1,050 photo rows; captions carry exactly one keyword each so every
    item earns exactly one rule tag."""
    header = ("photo_id", "district", "caption", "shot_at", "blob_hash", "url")
    rows = []
    for i in range(GRAFFITI_TOTAL):
        digest = store.put_blob(f"graffiti-image-{i + 1:04d}".encode("utf-8"))
        if i < GRAFFITI_ACCEPTED:
            caption = _POLITICAL_CAPTIONS[i % len(_POLITICAL_CAPTIONS)]
        else:
            caption = _OTHER_CAPTIONS[i % len(_OTHER_CAPTIONS)]
        rows.append(
            (
                f"g-{i + 1:04d}",
                f"district-{i % 7 + 1}",
                caption,
                f"2024-{(i % 12) + 1:02d}-{(i % 28) + 1:02d}T14:00:00Z",
                digest,
                f"https://example.org/graffiti/g-{i + 1:04d}",
            )
        )
    return StagedTable(header=header, rows=tuple(rows), source_uri="field-photo-manifest")


def political_ruleset() -> dict:
    return {
        "name": POLITICAL_RULESET,
        "rules": [
            {"pattern": "eleição|eleicao", "label": "political", "confidence": 0.9},
            {"pattern": "protesto", "label": "political", "confidence": 0.9},
            {"pattern": "partido", "label": "political", "confidence": 0.9},
            {"pattern": "greve", "label": "political", "confidence": 0.9},
            {"pattern": "voto", "label": "political", "confidence": 0.9},
            {"pattern": "flor", "label": "non-political", "confidence": 0.7},
            {"pattern": "músico|musico", "label": "non-political", "confidence": 0.7},
            {"pattern": "paisagem", "label": "non-political", "confidence": 0.7},
            {"pattern": "assinatura", "label": "non-political", "confidence": 0.7},
            {"pattern": "personagem", "label": "non-political", "confidence": 0.7},
        ],
    }


def _build_graffiti(store: Store) -> GraffitiHandles:
    dataset = create_dataset(
        store, "graffiti-photos",
        description="street photography survey of graffiti across city districts",
        domain="political-science",
    )
    created = curate.create_experiment(
        store,
        name="graffiti-messages",
        research_question="how is political messaging expressed in urban graffiti?",
        date="2024-05-02T00:00:00Z",
        team=[
            {"name": "C. Mendes", "role": "senior researcher", "seniority": "senior",
             "responsibilities": ["codebook", "validation"]},
            {"name": "T. Rocha", "role": "junior researcher", "seniority": "junior",
             "responsibilities": ["field photography", "first-pass tagging"]},
        ],
        settings={
            "selection_criteria": ["visible from public space"],
            "inclusion_rules": ["no private property interiors"],
        },
    )
    experiment = created.experiment
    senior_id = experiment.team[0].id
    junior_id = experiment.team[1].id
    # second research cycle after the codebook discussion rounds
    curate.update_experiment(store, experiment.id, cycle=2)

    manifest = load_release(
        store, dataset.id, graffiti_manifest(store),
        content_kind="media-manifest",
        license="CC-BY-NC-4.0",
        external_id_column="photo_id",
        media_hash_column="blob_hash",
    )
    release_id = manifest.release.id

    verdicts = [
        {"item": f"g-{i + 1:04d}",
         "verdict": "accepted" if i < GRAFFITI_ACCEPTED else "rejected"}
        for i in range(GRAFFITI_TOTAL)
    ]
    pipeline = orchestrate.define_pipeline(
        store,
        {
            "steps": [
                {"op": "apply_rule_tags",
                 "params": {"ruleset": political_ruleset(), "text_column": "caption"},
                 "bind": [f"release:{release_id}"]},
                {"op": "batch_review",
                 "params": {"validator": senior_id, "verdicts": verdicts},
                 "bind": [f"release:{release_id}"]},
            ]
        },
    )
    run, _ = orchestrate.run_pipeline(store, pipeline, experiment.id)
    if run.status != "succeeded":
        raise RuntimeError(f"graffiti pipeline failed: {run.steps[-1].error}")

    # manual codebook passes after the machine-assisted round: the junior
    # contributes most of the hand tags
    items = store.items_of(release_id)
    for item in items[:30]:
        curate.apply_user_tag(store, item.id, "stencil", junior_id, experiment.id)
    for item in items[30:38]:
        curate.apply_user_tag(store, item.id, "mural", senior_id, experiment.id)
    curate.publish_experiment(store, experiment.id, senior_id, comment="cycle 2 accepted")

    return GraffitiHandles(
        dataset_id=dataset.id,
        experiment_id=experiment.id,
        run_id=run.id,
        manifest_release_id=release_id,
        senior_id=senior_id,
        junior_id=junior_id,
    )


def write_demo_sources(directory) -> dict:
    """Materialize the raw scenario sources for inspection; returns paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = {"jellyfish_csv": directory / "instagram-export.csv"}
    out["jellyfish_csv"].write_bytes(jellyfish_csv_bytes())
    for i, (sid, x, y) in enumerate(STATIONS):
        path = directory / f"{sid.lower()}-hhz-z.xsac"
        path.write_bytes(write_xsac(synth_trace(sid, x, y, with_burst=(i == 0))))
        out[f"trace_{sid}"] = path
    out["political_ruleset"] = directory / "political-indicators.json"
    out["political_ruleset"].write_text(json.dumps(political_ruleset(), indent=2))
    return out
