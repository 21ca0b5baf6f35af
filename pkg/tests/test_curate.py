from datetime import datetime, timezone

import pytest

from expcurate import curate
from expcurate.errors import (
    MissingQuestion,
    NonNumericColumn,
    NotTeamMember,
    SeniorRequired,
    StaleHistory,
    UnknownTarget,
    UnmappedRequired,
    ValidationFailed,
)
from expcurate.ingest import EnrichmentRules, StagedTable, create_dataset, default_rule_table, load_release
from expcurate.metamodel import content_hash

REF = datetime(2023, 5, 10, tzinfo=timezone.utc)

TEAM = [
    {"name": "Senior B.", "role": "biologist", "seniority": "senior"},
    {"name": "Junior D.", "role": "data scientist", "seniority": "junior"},
]


def _experiment(store, team=TEAM):
    created = curate.create_experiment(
        store,
        name="caravelas",
        research_question="track jellyfish sightings",
        date="2023-05-10T00:00:00Z",
        team=team,
    )
    return created


def _text_release(store, texts):
    ds = create_dataset(store, "texts")
    return load_release(store, ds.id, list(texts), content_kind="text")


class TestCreateExperiment:
    def test_two_role_team_draft(self, tmp_store):
        created = _experiment(tmp_store)
        assert created.experiment.status == "draft"
        assert created.experiment.cycle == 1
        assert created.warnings == ()
        roles = {m.role for m in created.experiment.team}
        assert roles == {"biologist", "data scientist"}

    def test_missing_question(self, tmp_store):
        with pytest.raises(MissingQuestion):
            curate.create_experiment(
                tmp_store, name="x", research_question="", date="2023-01-01", team=TEAM
            )

    def test_junior_only_team_created_with_warning(self, tmp_store):
        created = _experiment(tmp_store, team=[TEAM[1]])
        assert created.experiment.status == "draft"
        assert any("publishing will be blocked" in w for w in created.warnings)

    def test_publish_requires_senior(self, tmp_store):
        created = _experiment(tmp_store)
        junior = created.experiment.team[1].id
        senior = created.experiment.team[0].id
        with pytest.raises(SeniorRequired):
            curate.publish_experiment(tmp_store, created.experiment.id, junior)
        published = curate.publish_experiment(tmp_store, created.experiment.id, senior)
        assert published.status == "published"


class TestRuleTags:
    RULESET = curate.TagRuleSet.from_record(
        {
            "name": "keywords",
            "rules": [
                {"pattern": "caravela", "label": "physalia-sighting", "confidence": 0.9},
                {"pattern": "avistada", "label": "seen", "confidence": 0.5},
            ],
        }
    )

    def test_rule_fires_with_confidence(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["caravelaportuguesa avistada"]).release
        result = curate.apply_rule_tags(tmp_store, release.id, self.RULESET, exp.id)
        labels = {(t.label, t.confidence) for t in result.tags}
        assert ("physalia-sighting", 0.9) in labels

    def test_no_match_still_records_action(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["nothing here"]).release
        result = curate.apply_rule_tags(tmp_store, release.id, self.RULESET, exp.id)
        assert result.tags == ()
        assert result.action.operation == "apply_rule_tags"
        assert result.action.evaluation["tags"] == 0

    def test_two_overlapping_rules_two_tags(self, tmp_store):
        # 3-item fixture, hand enumeration: item0 matches both rules (2 tags),
        # item1 matches one (1), item2 matches none -> 3 tags total
        exp = _experiment(tmp_store).experiment
        release = _text_release(
            tmp_store,
            ["caravela avistada", "caravela na praia", "mar calmo"],
        ).release
        result = curate.apply_rule_tags(tmp_store, release.id, self.RULESET, exp.id)
        items = tmp_store.items_of(release.id)
        by_item = {i.id: [] for i in items}
        for tag in result.tags:
            by_item[tag.target].append(tag.label)
        assert sorted(by_item[items[0].id]) == ["physalia-sighting", "seen"]
        assert by_item[items[1].id] == ["physalia-sighting"]
        assert by_item[items[2].id] == []
        assert len(result.tags) == 3

    def test_determinism(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["caravela", "avistada caravela"]).release
        first = curate.apply_rule_tags(tmp_store, release.id, self.RULESET, exp.id)
        second = curate.apply_rule_tags(tmp_store, release.id, self.RULESET, exp.id)
        key = lambda tags: sorted((t.target, t.label, t.confidence) for t in tags)
        assert key(first.tags) == key(second.tags)


class TestUserTags:
    def test_team_member_tags(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["body"]).release
        item = tmp_store.items_of(release.id)[0]
        tag = curate.apply_user_tag(tmp_store, item.id, "physalia", exp.team[0].id, exp.id)
        assert tag.origin == "user"
        assert tag.confidence is None

    def test_outsider_rejected(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["body"]).release
        item = tmp_store.items_of(release.id)[0]
        with pytest.raises(NotTeamMember):
            curate.apply_user_tag(tmp_store, item.id, "x", "mem-outsider", exp.id)

    def test_retag_appends_history(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["body"]).release
        item = tmp_store.items_of(release.id)[0]
        member = exp.team[0].id
        curate.apply_user_tag(tmp_store, item.id, "same", member, exp.id)
        curate.apply_user_tag(tmp_store, item.id, "same", member, exp.id)
        assert len(curate.tag_history(tmp_store, item.id)) == 2


class TestReviewAndHistory:
    def _tagged_item(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["body"]).release
        item = tmp_store.items_of(release.id)[0]
        tag = curate.apply_user_tag(tmp_store, item.id, "first", exp.team[1].id, exp.id)
        return exp, item, tag

    def test_senior_accepts_tag(self, tmp_store):
        exp, item, tag = self._tagged_item(tmp_store)
        curate.review(tmp_store, tag.id, exp.team[0].id, "accepted")
        assert curate.effective_verdict(tmp_store, tag.id).verdict == "accepted"

    def test_junior_publish_validation_blocked(self, tmp_store):
        exp, item, tag = self._tagged_item(tmp_store)
        with pytest.raises(SeniorRequired):
            curate.review(tmp_store, exp.id, exp.team[1].id, "accepted")

    def test_reject_with_comment_stored(self, tmp_store):
        exp, item, tag = self._tagged_item(tmp_store)
        record = curate.review(tmp_store, tag.id, exp.team[0].id, "rejected", comment="blurry")
        assert record.comment == "blurry"
        assert curate.effective_verdict(tmp_store, tag.id).verdict == "rejected"

    def test_tag_then_accept_history_order(self, tmp_store):
        exp, item, tag = self._tagged_item(tmp_store)
        curate.review(tmp_store, tag.id, exp.team[0].id, "accepted")
        entries = curate.tag_history(tmp_store, tag.id)
        # target here is the tag itself: validation only
        assert [e.kind for e in entries] == ["validation"]
        item_history = curate.tag_history(tmp_store, item.id)
        assert [e.kind for e in item_history] == ["tag"]

    def test_untouched_item_empty_history(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        release = _text_release(tmp_store, ["a", "b"]).release
        untouched = tmp_store.items_of(release.id)[1]
        assert curate.tag_history(tmp_store, untouched.id) == []

    def test_unknown_target(self, tmp_store):
        with pytest.raises(UnknownTarget):
            curate.tag_history(tmp_store, "item-missing")

    def test_tag_reject_retag_accept_walkthrough(self, tmp_store):
        # hand-walked: 4 history entries on the item's tags, final effective accepted
        exp = _experiment(tmp_store).experiment
        senior, junior = exp.team[0].id, exp.team[1].id
        release = _text_release(tmp_store, ["body"]).release
        item = tmp_store.items_of(release.id)[0]
        tag1 = curate.apply_user_tag(tmp_store, item.id, "physalia", junior, exp.id)
        curate.review(tmp_store, tag1.id, senior, "rejected")
        tag2 = curate.apply_user_tag(tmp_store, item.id, "velella", junior, exp.id)
        curate.review(tmp_store, tag2.id, senior, "accepted")
        combined = (
            curate.tag_history(tmp_store, item.id)
            + curate.tag_history(tmp_store, tag1.id)
            + curate.tag_history(tmp_store, tag2.id)
        )
        combined.sort(key=lambda e: e.created_at)
        kinds = [e.kind for e in combined]
        assert kinds == ["tag", "validation", "tag", "validation"]
        assert curate.effective_verdict(tmp_store, tag2.id).verdict == "accepted"

    def test_stale_seq_rejected(self, tmp_store):
        exp, item, tag = self._tagged_item(tmp_store)
        seq = curate.history_seq(tmp_store, tag.id)
        curate.review(tmp_store, tag.id, exp.team[0].id, "accepted", expected_seq=seq)
        with pytest.raises(StaleHistory):
            curate.review(tmp_store, tag.id, exp.team[0].id, "rejected", expected_seq=seq)


def _jellyfish_table():
    return StagedTable(
        header=("ID", "source", "location", "media URL"),
        rows=(
            ("1", "instagram", "-23.1,-43.1", "http://x/1"),
            ("2", "instagram", "-23.2,-43.2", "http://x/2"),
        ),
    )


class TestMapHeaders:
    MAPPING = {
        "ID": "external_id",
        "source": "source",
        "location": "location",
        "media URL": "media_url",
    }

    def _loaded(self, tmp_store, table=None):
        exp = _experiment(tmp_store).experiment
        ds = create_dataset(tmp_store, "jelly")
        result = load_release(tmp_store, ds.id, table or _jellyfish_table(), content_kind="tabular")
        return exp, result.release

    def test_export_mapping(self, tmp_store):
        exp, release = self._loaded(tmp_store)
        result = curate.map_headers(tmp_store, release.id, self.MAPPING, exp.id)
        from expcurate.ingest.loader import release_table

        table = release_table(tmp_store, result.release)
        assert table.header == ("external_id", "source", "location", "media_url")
        assert result.release.provenance.kind == "derived"
        assert result.release.provenance.ref == result.action.id
        assert result.action.outputs == (result.release.id,)

    def test_identity_mapping_same_hash_new_id(self, tmp_store):
        already_mapped = StagedTable(
            header=("external_id", "source", "location", "media_url"),
            rows=(("1", "s", "l", "m"),),
        )
        exp, release = self._loaded(tmp_store, table=already_mapped)
        identity = {c: c for c in already_mapped.header}
        result = curate.map_headers(tmp_store, release.id, identity, exp.id)
        assert result.release.id != release.id
        assert result.release.content_hash == release.content_hash

    def test_unmapped_required_field(self, tmp_store):
        exp, release = self._loaded(tmp_store)
        mapping = dict(self.MAPPING)
        del mapping["ID"]
        with pytest.raises(UnmappedRequired):
            curate.map_headers(tmp_store, release.id, mapping, exp.id)

    def test_declared_absent_accepted(self, tmp_store):
        exp, release = self._loaded(tmp_store)
        mapping = dict(self.MAPPING)
        del mapping["ID"]
        result = curate.map_headers(
            tmp_store, release.id, mapping, exp.id, absent=("external_id",)
        )
        assert result.release.content_kind == "tabular"


class TestNormalizeGeotemporal:
    def _rules(self):
        return EnrichmentRules(
            time_column="when",
            reference=REF,
            rule_table=default_rule_table("southern"),
        )

    def _release_with_dates(self, tmp_store, dates):
        exp = _experiment(tmp_store).experiment
        ds = create_dataset(tmp_store, "dates")
        table = StagedTable(header=("when",), rows=tuple((d,) for d in dates))
        release = load_release(tmp_store, ds.id, table, content_kind="tabular").release
        return exp, release

    def test_three_vague_two_resolvable(self, tmp_store):
        exp, release = self._release_with_dates(
            tmp_store, ["last summer", "last winter", "sometime ago"]
        )
        result = curate.normalize_geotemporal(tmp_store, release.id, self._rules(), exp.id)
        assert result.action.evaluation == {"resolved": 2, "unresolved": 1}

    def test_all_iso_all_resolved(self, tmp_store):
        exp, release = self._release_with_dates(
            tmp_store, ["2023-01-01T00:00:00Z", "2023-02-01T00:00:00Z"]
        )
        result = curate.normalize_geotemporal(tmp_store, release.id, self._rules(), exp.id)
        assert result.action.evaluation == {"resolved": 2, "unresolved": 0}

    def test_empty_rule_table_leaves_vague_unresolved(self, tmp_store):
        exp, release = self._release_with_dates(tmp_store, ["last summer"])
        from expcurate.ingest.geotemporal import RuleTable

        rules = EnrichmentRules(
            time_column="when", reference=REF, rule_table=RuleTable(rules=(), hemisphere="southern")
        )
        result = curate.normalize_geotemporal(tmp_store, release.id, rules, exp.id)
        assert result.action.evaluation == {"resolved": 0, "unresolved": 1}


class TestPrepareFeatures:
    def _numeric_release(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        ds = create_dataset(tmp_store, "nums")
        table = StagedTable(
            header=("a", "b", "label"),
            rows=(
                ("1", "2.5", "x"),
                ("2", "3.5", "y"),
                ("", "4.5", "z"),  # null in a selected column: dropped
                ("4", "5.5", "w"),
            ),
        )
        release = load_release(tmp_store, ds.id, table, content_kind="tabular").release
        return exp, release

    def test_matrix_shape_and_dropped(self, tmp_store):
        exp, release = self._numeric_release(tmp_store)
        result = curate.prepare_features(tmp_store, release.id, ["a", "b"], exp.id)
        assert result.artefact.structure == "feature-matrix 3x2"
        assert result.dropped_rows == 1
        columns, rows = curate.matrix_from_blob(
            tmp_store.get_blob(result.artefact.blob_hash)
        )
        assert columns == ["a", "b"]
        assert rows == [[1.0, 2.5], [2.0, 3.5], [4.0, 5.5]]

    def test_zero_columns_rejected(self, tmp_store):
        exp, release = self._numeric_release(tmp_store)
        with pytest.raises(NonNumericColumn):
            curate.prepare_features(tmp_store, release.id, [], exp.id)

    def test_non_numeric_column_rejected(self, tmp_store):
        exp, release = self._numeric_release(tmp_store)
        with pytest.raises(NonNumericColumn):
            curate.prepare_features(tmp_store, release.id, ["label"], exp.id)

    def test_matrix_blob_round_trips_bit_exactly(self, tmp_store):
        exp, release = self._numeric_release(tmp_store)
        result = curate.prepare_features(tmp_store, release.id, ["a", "b"], exp.id)
        blob = tmp_store.get_blob(result.artefact.blob_hash)
        assert content_hash(blob) == result.artefact.blob_hash


class TestImportLabels:
    def test_csv_with_header_row(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        ds = create_dataset(tmp_store, "m")
        table = StagedTable(header=("ID", "v"), rows=(("i1", "a"), ("i2", "b")))
        release = load_release(
            tmp_store, ds.id, table, content_kind="tabular", external_id_column="ID"
        ).release
        csv_bytes = b"item_external_id,label,confidence\ni1,cat,0.9\ni2,dog,0.4\n"
        tags, action = curate.import_labels(
            tmp_store, release.id, csv_bytes, "model-z", exp.id
        )
        assert len(tags) == 2
        assert all(t.origin == "algorithmic" and t.author == "model-z" for t in tags)
        assert {t.confidence for t in tags} == {0.9, 0.4}

    def test_unknown_external_id(self, tmp_store):
        exp = _experiment(tmp_store).experiment
        ds = create_dataset(tmp_store, "m")
        table = StagedTable(header=("ID",), rows=(("i1",),))
        release = load_release(
            tmp_store, ds.id, table, content_kind="tabular", external_id_column="ID"
        ).release
        with pytest.raises(UnknownTarget):
            curate.import_labels(tmp_store, release.id, [["zzz", "cat", "0.5"]], "m", exp.id)
