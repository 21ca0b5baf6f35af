import math
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expcurate.errors import (
    EmptySource,
    HeaderMalformed,
    RaggedRow,
    SampleCountMismatch,
    UnknownColumn,
)
from expcurate.ingest import (
    EnrichmentRules,
    ReliabilityRule,
    SignalTrace,
    StagedTable,
    clean_dedupe,
    create_dataset,
    default_rule_table,
    enrich,
    extract_tabular,
    infer_type,
    load_release,
    payload_to_table,
    profile_table,
    read_xsac,
    resolve_geopoint,
    resolve_geotemporal,
    table_to_payload,
    write_xsac,
)
from expcurate.ingest.profile import numeric_histogram, profile_column

REF = datetime(2023, 5, 10, tzinfo=timezone.utc)


class TestExtractTabular:
    def test_four_column_export_header(self):
        data = b"ID,source,location,media_url\n123,instagram,-23.1,-43.2,\n"
        # note: the location cell above would make the row ragged; use a clean one
        data = b'ID,source,location,media_url\n123,instagram,"-23.1,-43.2",https://x/1\n'
        table = extract_tabular(data)
        assert table.header == ("ID", "source", "location", "media_url")
        assert len(table.rows) == 1

    def test_empty_file(self):
        with pytest.raises(EmptySource):
            extract_tabular(b"")

    def test_quoted_field_keeps_comma(self):
        table = extract_tabular(b'c1\n"a,b"\n')
        assert table.rows[0][0] == "a,b"

    def test_ragged_row_number(self):
        with pytest.raises(RaggedRow) as err:
            extract_tabular(b"a,b\n1,2\n1\n")
        assert err.value.row_number == 2

    def test_alternate_dialect(self):
        table = extract_tabular(b"a;b\n'x;y';2\n", delimiter=";", quote="'")
        assert table.rows[0] == ("x;y", "2")

    def test_payload_round_trip(self):
        table = extract_tabular(b"a,b\n1,2\n3,4\n")
        again = payload_to_table(table_to_payload(table))
        assert again.header == table.header
        assert again.rows == table.rows


class TestCleanDedupe:
    def test_two_identical_rows(self):
        table = StagedTable(header=("k", "v"), rows=(("a", "1"), ("a", "1")))
        cleaned, report = clean_dedupe(table, ["k"])
        assert len(cleaned.rows) == 1
        assert report.removed == 1

    def test_all_distinct_identity(self):
        table = StagedTable(header=("k",), rows=(("a",), ("b",), ("c",)))
        cleaned, report = clean_dedupe(table, ["k"])
        assert cleaned.rows == table.rows
        assert report.removed == 0

    def test_five_rows_two_duplicate_keys(self):
        # keys a, b, a, c, b -> keep a, b, c = 3 rows (hand count)
        rows = (("a", "1"), ("b", "2"), ("a", "3"), ("c", "4"), ("b", "5"))
        table = StagedTable(header=("k", "v"), rows=rows)
        cleaned, report = clean_dedupe(table, ["k"])
        assert len(cleaned.rows) == 3
        assert report.removed == 2
        assert [r[0] for r in cleaned.rows] == ["a", "b", "c"]

    def test_unknown_key_column(self):
        table = StagedTable(header=("k",), rows=(("a",),))
        with pytest.raises(UnknownColumn):
            clean_dedupe(table, ["missing"])

    @given(
        st.lists(
            st.tuples(st.sampled_from("abcd"), st.text(max_size=3)), max_size=20
        )
    )
    @settings(max_examples=50)
    def test_idempotent(self, pairs):
        table = StagedTable(header=("k", "v"), rows=tuple(pairs))
        once, _ = clean_dedupe(table, ["k"])
        twice, report = clean_dedupe(once, ["k"])
        assert twice.rows == once.rows
        assert report.removed == 0


class TestGeoTemporal:
    def test_last_summer_southern(self):
        rules = default_rule_table("southern")
        res = resolve_geotemporal("last summer", REF, rules)
        assert res.kind == "interval"
        assert res.start == datetime(2022, 12, 21, tzinfo=timezone.utc)
        assert res.end == datetime(2023, 3, 20, tzinfo=timezone.utc)

    def test_last_summer_northern_differs(self):
        rules = default_rule_table("northern")
        res = resolve_geotemporal("last summer", REF, rules)
        assert res.start == datetime(2022, 6, 21, tzinfo=timezone.utc)
        assert res.end == datetime(2022, 9, 20, tzinfo=timezone.utc)

    def test_iso_passthrough(self):
        res = resolve_geotemporal("2023-02-01T10:00:00Z", REF, default_rule_table())
        assert res.kind == "point"
        assert res.instant == datetime(2023, 2, 1, 10, tzinfo=timezone.utc)

    def test_unmatched_is_unresolved_never_guessed(self):
        res = resolve_geotemporal("sometime ago", REF, default_rule_table())
        assert res.kind == "unresolved"

    def test_geopoint_ranges(self):
        assert resolve_geopoint("-23.5,-43.2") == (-23.5, -43.2)
        assert resolve_geopoint("95.0,-43.2") is None
        assert resolve_geopoint("-23.5,200.0") is None
        assert resolve_geopoint("not a point") is None


class TestXsac:
    def _trace(self, n=3000):
        samples = tuple(math.sin(i / 7.0) * (1 + i % 5) for i in range(n))
        return SignalTrace(
            station_id="ST01",
            channel_id="HHZ",
            axis="Z",
            sample_rate_hz=100.0,
            start_time=datetime(2024, 3, 1, tzinfo=timezone.utc),
            samples=samples,
        )

    def test_declared_count_parses(self):
        trace = read_xsac(write_xsac(self._trace(3000)))
        assert trace.n_samples == 3000

    def test_count_mismatch(self):
        data = write_xsac(self._trace(10)).decode()
        broken = data.replace("n_samples=10", "n_samples=11")
        with pytest.raises(SampleCountMismatch):
            read_xsac(broken.encode())

    def test_station_and_channel_preserved(self):
        trace = read_xsac(write_xsac(self._trace(10)))
        assert trace.station_id == "ST01"
        assert trace.channel_id == "HHZ"

    def test_missing_magic(self):
        with pytest.raises(HeaderMalformed):
            read_xsac(b"station_id=X\nDATA\n")

    def test_unknown_header_key(self):
        data = write_xsac(self._trace(5)).decode().replace("axis=Z", "axis=Z\nwhat=no")
        with pytest.raises(HeaderMalformed):
            read_xsac(data.encode())

    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64),
                    min_size=1, max_size=50))
    @settings(max_examples=50)
    def test_round_trip_exact(self, samples):
        trace = SignalTrace(
            station_id="S", channel_id="C", axis="X", sample_rate_hz=50.0,
            start_time=datetime(2024, 1, 1, tzinfo=timezone.utc),
            samples=tuple(samples),
        )
        again = read_xsac(write_xsac(trace))
        assert again == trace


class TestProfile:
    def test_integer_column_stats(self):
        col = profile_column("n", ["1", "2", "3"])
        assert col.inferred_type == "integer"
        assert col.minimum == 1 and col.maximum == 3 and col.mean == 2

    def test_mixed_falls_back_to_string(self):
        assert infer_type(["1", "x"]) == "string"

    def test_population_stddev_oracle(self):
        # brute-force oracle: mean 5, sum of squared deviations 32, /8 -> 4, sqrt -> 2
        values = [2, 4, 4, 4, 5, 5, 7, 9]
        mean = sum(values) / len(values)
        oracle = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        col = profile_column("v", [str(v) for v in values])
        assert oracle == 2.0
        assert col.stddev == pytest.approx(2.0, abs=1e-12)

    def test_ordered_trials(self):
        assert infer_type(["true", "false"]) == "boolean"
        assert infer_type(["1", "2"]) == "integer"
        assert infer_type(["1.5", "2"]) == "decimal"
        assert infer_type(["2023-02-01T10:00:00Z"]) == "timestamp"
        assert infer_type(["-23.5,-43.2"]) == "geopoint"
        assert infer_type(["hello"]) == "string"

    def test_nulls_do_not_change_type(self):
        assert infer_type(["", "3", ""]) == "integer"

    def test_histogram_sums_to_non_null_count(self):
        col = profile_column("v", [str(v) for v in range(97)] + ["", "", ""])
        assert sum(c for _, c in col.histogram) == 97
        assert col.null_count == 3

    def test_single_valued_column_one_bin(self):
        assert numeric_histogram([4.0, 4.0, 4.0]) == (((4.0, 4.0), 3),)

    def test_row_permutation_never_changes_types(self):
        rows = [("1", "x"), ("2", "y"), ("", "z"), ("4", "w")]
        table_a = StagedTable(header=("n", "s"), rows=tuple(rows))
        table_b = StagedTable(header=("n", "s"), rows=tuple(reversed(rows)))
        types_a = [c.inferred_type for c in profile_table(table_a).columns]
        types_b = [c.inferred_type for c in profile_table(table_b).columns]
        assert types_a == types_b == ["integer", "string"]


class TestEnrich:
    def test_empty_rules_identity(self):
        table = StagedTable(header=("a",), rows=(("1",),))
        out, report = enrich(table, EnrichmentRules())
        assert out == table
        assert report.time_resolved == 0

    def test_vague_date_gains_interval_columns(self):
        table = StagedTable(header=("when",), rows=(("last summer",),))
        rules = EnrichmentRules(
            time_column="when", reference=REF, rule_table=default_rule_table("southern")
        )
        out, report = enrich(table, rules)
        assert out.header == ("when", "resolved_start", "resolved_end", "time_status")
        assert out.rows[0][3] == "interval"
        assert out.rows[0][1].startswith("2022-12-21")
        assert report.time_resolved == 1

    def test_reliability_grade_applied(self):
        table = StagedTable(header=("source",), rows=(("instagram",), ("rss",)))
        rules = EnrichmentRules(reliability=(ReliabilityRule("source", "instagram", "B"),))
        out, _ = enrich(table, rules)
        assert out.rows[0][-1] == "B"
        assert out.rows[1][-1] == ""

    def test_unknown_column(self):
        table = StagedTable(header=("a",), rows=())
        with pytest.raises(UnknownColumn):
            enrich(table, EnrichmentRules(location_column="nope"))


class TestLoadRelease:
    def test_versions_increment(self, tmp_store):
        ds = create_dataset(tmp_store, "d")
        table = StagedTable(header=("a",), rows=(("1",),))
        first = load_release(tmp_store, ds.id, table, content_kind="tabular")
        second = load_release(tmp_store, ds.id, table, content_kind="tabular")
        assert first.release.version == 1
        assert second.release.version == 2
        assert first.release.content_hash == second.release.content_hash

    def test_deterministic_hash_and_profile(self, tmp_store):
        ds = create_dataset(tmp_store, "d")
        table = StagedTable(header=("a", "b"), rows=(("1", "x"), ("2", "y")))
        r1 = load_release(tmp_store, ds.id, table, content_kind="tabular")
        r2 = load_release(tmp_store, ds.id, table, content_kind="tabular")
        assert r1.release.content_hash == r2.release.content_hash
        assert r1.release.profile_id == r2.release.profile_id

    def test_catalogue_bucketing(self, tmp_store):
        ds = create_dataset(tmp_store, "d")
        cell = "x" * 400  # payload just over nothing, well under 1MB
        table = StagedTable(header=("a",), rows=((cell,),))
        when = datetime(2025, 1, 5, 12, tzinfo=timezone.utc)
        result = load_release(tmp_store, ds.id, table, content_kind="tabular", when=when)
        assert result.catalogue.day == "2025-01-05"
        assert result.catalogue.size_bucket == "<1MB"
        assert result.catalogue.format_kind == "tabular"

    def test_items_materialized_in_ordinal_order(self, tmp_store):
        ds = create_dataset(tmp_store, "d")
        table = StagedTable(
            header=("ID", "v"), rows=(("x1", "1"), ("x2", "2"), ("x3", "3"))
        )
        result = load_release(
            tmp_store, ds.id, table, content_kind="tabular", external_id_column="ID"
        )
        items = tmp_store.items_of(result.release.id)
        assert [i.ordinal for i in items] == [0, 1, 2]
        assert [i.external_id for i in items] == ["x1", "x2", "x3"]

    def test_signal_payload_round_trips(self, tmp_store):
        ds = create_dataset(tmp_store, "sig")
        trace = SignalTrace(
            station_id="ST01", channel_id="HHZ", axis="Z", sample_rate_hz=100.0,
            start_time=datetime(2024, 3, 1, tzinfo=timezone.utc),
            samples=(0.5, -0.25, 1.0),
        )
        result = load_release(tmp_store, ds.id, trace, content_kind="signal")
        again = read_xsac(tmp_store.get_blob(result.release.content_hash))
        assert again == trace
