import json

import pytest

from expcurate.errors import (
    CorruptionMidLedger,
    PathOccupied,
    StoreLocked,
    UnknownBlob,
    UnknownLedger,
    ValidationFailed,
)
from expcurate.metamodel import canonical_encode, content_hash
from expcurate.store import LEDGER_NAMES, append_record, init_store, open_store
from helpers import make_dataset, make_experiment, make_member

SHA256_ABC = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


class TestInit:
    def test_fresh_dir_has_ten_empty_ledgers(self, tmp_path):
        store = init_store(tmp_path / "s")
        try:
            ledgers = sorted(p.name for p in (tmp_path / "s" / "ledgers").iterdir())
            assert len(ledgers) == 10
            assert set(LEDGER_NAMES) == {name[: -len(".jsonl")] for name in ledgers}
            assert store.index.records == {}
        finally:
            store.close()

    def test_existing_non_empty_dir_occupied(self, tmp_path):
        target = tmp_path / "s"
        target.mkdir()
        (target / "junk.txt").write_text("hello")
        with pytest.raises(PathOccupied):
            init_store(target)

    def test_init_then_open_identical_empty_index(self, tmp_path):
        store = init_store(tmp_path / "s")
        store.close()
        reopened = open_store(tmp_path / "s")
        try:
            assert reopened.index.records == {}
            assert reopened.recovery.is_clean
        finally:
            reopened.close()


class TestAppend:
    def test_first_append_seq_1(self, tmp_store):
        assert tmp_store.append(make_dataset("a")) == 1

    def test_two_appends_seq_1_2(self, tmp_store):
        assert tmp_store.append(make_dataset("a")) == 1
        assert tmp_store.append(make_dataset("b")) == 2

    def test_invalid_record_leaves_ledger_unchanged(self, tmp_store):
        path = tmp_store.root / "ledgers" / "datasets.jsonl"
        before = path.read_bytes()
        with pytest.raises(ValidationFailed):
            tmp_store.append(make_dataset(name=""))
        assert path.read_bytes() == before

    def test_append_record_checks_ledger_name(self, tmp_store):
        with pytest.raises(UnknownLedger):
            append_record(tmp_store, "nonexistent", make_dataset("a"))
        with pytest.raises(UnknownLedger):
            append_record(tmp_store, "releases", make_dataset("a"))
        assert append_record(tmp_store, "datasets", make_dataset("a")) == 1

    def test_ledger_line_is_canonical_with_checksum(self, tmp_store):
        ds = make_dataset("wire-format")
        tmp_store.append(ds)
        line = (tmp_store.root / "ledgers" / "datasets.jsonl").read_bytes().splitlines()[0]
        obj = json.loads(line)
        assert list(obj) == sorted(obj)
        assert obj["kind"] == "dataset"
        assert obj["seq"] == 1
        assert obj["checksum"] == content_hash(canonical_encode(obj["body"]))


class TestBlobs:
    def test_put_get_round_trip_with_vector(self, tmp_store):
        digest = tmp_store.put_blob(b"abc")
        assert digest == SHA256_ABC
        assert tmp_store.get_blob(digest) == b"abc"

    def test_put_idempotent_single_file(self, tmp_store):
        d1 = tmp_store.put_blob(b"same bytes")
        d2 = tmp_store.put_blob(b"same bytes")
        assert d1 == d2
        files = list((tmp_store.root / "blobs" / d1[:2]).iterdir())
        assert len(files) == 1

    def test_unknown_blob(self, tmp_store):
        with pytest.raises(UnknownBlob):
            tmp_store.get_blob("0" * 64)

    def test_blob_path_layout(self, tmp_store):
        digest = tmp_store.put_blob(b"layout")
        assert (tmp_store.root / "blobs" / digest[:2] / digest).exists()


class TestRecover:
    def _fill(self, tmp_path, n=5):
        store = init_store(tmp_path / "s", durable=False)
        for i in range(n):
            store.append(make_dataset(f"d{i}"))
        store.close()
        return tmp_path / "s"

    def test_truncated_last_line_dropped_rest_intact(self, tmp_path):
        root = self._fill(tmp_path)
        ledger = root / "ledgers" / "datasets.jsonl"
        raw = ledger.read_bytes()
        ledger.write_bytes(raw[:-7])  # cut into the final record
        store = open_store(root, durable=False)
        try:
            assert len(store.recovery.dropped) == 1
            assert len(store.datasets()) == 4
        finally:
            store.close()

    def test_clean_ledgers_empty_report(self, tmp_path):
        root = self._fill(tmp_path)
        store = open_store(root, durable=False)
        try:
            assert store.recovery.is_clean
            assert len(store.datasets()) == 5
        finally:
            store.close()

    def test_bad_checksum_mid_ledger_raises(self, tmp_path):
        root = self._fill(tmp_path, n=5)
        ledger = root / "ledgers" / "datasets.jsonl"
        lines = ledger.read_bytes().splitlines(keepends=True)
        # corrupt a name character inside line 3's body
        lines[2] = lines[2].replace(b'"name":"d2"', b'"name":"XX"', 1)
        ledger.write_bytes(b"".join(lines))
        with pytest.raises(CorruptionMidLedger):
            open_store(root, durable=False)

    def test_unterminated_final_line_dropped_even_if_parseable(self, tmp_path):
        root = self._fill(tmp_path)
        ledger = root / "ledgers" / "datasets.jsonl"
        raw = ledger.read_bytes()
        ledger.write_bytes(raw[:-1])  # remove only the commit newline
        store = open_store(root, durable=False)
        try:
            assert len(store.datasets()) == 4
        finally:
            store.close()

    def test_recover_truncates_file_so_appends_stay_clean(self, tmp_path):
        root = self._fill(tmp_path)
        ledger = root / "ledgers" / "datasets.jsonl"
        raw = ledger.read_bytes()
        ledger.write_bytes(raw[:-7])
        store = open_store(root, durable=False)
        store.append(make_dataset("after-crash"))
        store.close()
        reopened = open_store(root, durable=False)
        try:
            assert reopened.recovery.is_clean
            assert len(reopened.datasets()) == 5
        finally:
            reopened.close()


class TestRebuildIndex:
    def test_last_writer_wins_for_status_updates(self, tmp_store):
        exp = make_experiment(team=[make_member("senior")])
        tmp_store.append(exp)
        updated = make_experiment(
            id=exp.id, team=list(exp.team), status="active", cycle=1
        )
        tmp_store.append(updated)
        assert tmp_store.get_any(exp.id).status == "active"
        tmp_store.rebuild_index()
        assert tmp_store.get_any(exp.id).status == "active"

    def test_empty_store_empty_index(self, tmp_store):
        tmp_store.rebuild_index()
        assert tmp_store.index.records == {}

    def test_1000_mixed_records_match_naive_replay_oracle(self, tmp_path):
        store = init_store(tmp_path / "s", durable=False)
        for i in range(500):
            store.append(make_dataset(f"d{i}"))
        experiments = [make_experiment(team=[make_member("senior")]) for _ in range(250)]
        for exp in experiments:
            store.append(exp)
        for exp in experiments:  # re-appends: updates that must supersede
            store.append(
                make_experiment(id=exp.id, team=list(exp.team), status="active")
            )
        store.close()

        # independent naive replay: raw json lines folded into a dict
        naive = {}
        for name in LEDGER_NAMES:
            for line in (tmp_path / "s" / "ledgers" / f"{name}.jsonl").read_bytes().splitlines():
                obj = json.loads(line)
                naive[obj["body"]["id"]] = obj["body"]

        reopened = open_store(tmp_path / "s", durable=False)
        try:
            assert len(reopened.index.records) == len(naive) == 750
            for rid, body in naive.items():
                assert reopened.get_any(rid).to_record() == body
        finally:
            reopened.close()


class TestCrashSafetyProperty:
    def test_every_truncation_of_final_record_yields_n_minus_1(self, tmp_path):
        # compact version of the acceptance criterion, N up to 8
        for n in range(1, 9):
            root = tmp_path / f"crash-{n}"
            store = init_store(root, durable=False)
            for i in range(n):
                store.append(make_dataset(f"d{i}"))
            store.close()
            ledger = root / "ledgers" / "datasets.jsonl"
            raw = ledger.read_bytes()
            final_line_len = len(raw.split(b"\n")[n - 1]) + 1
            start = len(raw) - final_line_len
            for cut in range(start, len(raw)):
                ledger.write_bytes(raw[:cut])
                reopened = open_store(root, durable=False)
                assert len(reopened.datasets()) == n - 1, f"n={n} cut={cut}"
                reopened.close()
                ledger.write_bytes(raw)


class TestAppendOnlyAndLocking:
    def test_ledger_grows_by_prefix(self, tmp_store):
        path = tmp_store.root / "ledgers" / "datasets.jsonl"
        tmp_store.append(make_dataset("a"))
        snapshot = path.read_bytes()
        tmp_store.append(make_dataset("b"))
        assert path.read_bytes().startswith(snapshot)

    def test_second_writer_locked_out(self, tmp_path):
        store = init_store(tmp_path / "s")
        try:
            with pytest.raises(StoreLocked):
                open_store(tmp_path / "s")
        finally:
            store.close()

    def test_concurrent_reader_allowed(self, tmp_path):
        store = init_store(tmp_path / "s")
        try:
            store.append(make_dataset("visible"))
            reader = open_store(tmp_path / "s", writable=False)
            assert len(reader.datasets()) == 1
            reader.close()
        finally:
            store.close()

    def test_monotone_clock(self, tmp_store):
        stamps = [tmp_store.next_timestamp() for _ in range(50)]
        assert all(a < b for a, b in zip(stamps, stamps[1:]))
