"""Single-node lakehouse storage.

Layout on disk:

    <root>/ledgers/<name>.jsonl   append-only metadata ledgers
    <root>/blobs/<xx>/<digest>    content-addressed payloads
    <root>/LOCK                   writer lock (flock)

A ledger line is the canonical encoding of
{"body": <record>, "checksum": sha256(body bytes), "kind": ..., "seq": n}
followed by a newline; the newline is the commit marker. The in-memory
index is a pure fold over the ledgers and can always be rebuilt. Updates
are re-appends of a record with the same id (event sourcing); nothing is
ever overwritten.
"""

from __future__ import annotations

import fcntl
import os
import threading
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

from expcurate.errors import (
    CorruptionMidLedger,
    CurationError,
    PathOccupied,
    StoreLocked,
    UnknownBlob,
    UnknownLedger,
    ValidationFailed,
)
from expcurate.metamodel import (
    canonical_encode,
    content_hash,
    decode_canonical,
    record_from_body,
    utc_now,
    validate_entity,
)
from expcurate.metamodel.types import CatalogueAssignment, Experiment, Item, Release

LEDGER_NAMES = (
    "datasets",
    "releases",
    "items",
    "actions",
    "artefacts",
    "experiments",
    "tags",
    "validations",
    "runs",
    "annotations",
)

# pipelines share the runs ledger and catalogue assignments the releases
# ledger; the record kind keeps them apart
KIND_TO_LEDGER = {
    "dataset": "datasets",
    "release": "releases",
    "catalogue_assignment": "releases",
    "item": "items",
    "action": "actions",
    "artefact": "artefacts",
    "experiment": "experiments",
    "tag": "tags",
    "validation": "validations",
    "run": "runs",
    "pipeline": "runs",
    "annotation": "annotations",
}


@dataclass
class RecoveryReport:
    dropped: list = field(default_factory=list)  # (ledger, reason)

    @property
    def is_clean(self):
        return not self.dropped


class _Index:
    def __init__(self):
        self.records = {}
        self.catalogues = {}
        self.items_by_release = {}
        self.tags_by_target = {}
        self.validations_by_target = {}
        self.by_kind_order = {}
        self.max_ts = None

    def apply(self, record):
        kind = record.kind
        if kind == "catalogue_assignment":
            self.catalogues[record.release_id] = record
            return
        rid = record.id
        if rid not in self.records:
            self.by_kind_order.setdefault(kind, []).append(rid)
        self.records[rid] = record
        if isinstance(record, Item):
            self.items_by_release.setdefault(record.release_id, {})[record.ordinal] = record
        elif kind == "tag":
            self.tags_by_target.setdefault(record.target, []).append(record)
        elif kind == "validation":
            self.validations_by_target.setdefault(record.target, []).append(record)
        ts = getattr(record, "created_at", None)
        if ts is not None and (self.max_ts is None or ts > self.max_ts):
            self.max_ts = ts

    def of_kind(self, kind):
        return [self.records[rid] for rid in self.by_kind_order.get(kind, [])]


class _BatchCatalog:
    """Read view over the store index plus a pending batch (unit of work).

    Derived releases and their producing actions reference each other, so
    referential checks run against the whole batch, not record by record.
    """

    def __init__(self, store, pending):
        self._store = store
        self._pending = {}
        self._pending_items = {}
        self._members = {}
        for rec in pending:
            if rec.kind == "catalogue_assignment":
                continue
            self._pending[rec.id] = rec
            if isinstance(rec, Item):
                self._pending_items[(rec.release_id, rec.ordinal)] = rec
            if isinstance(rec, Experiment):
                for m in rec.team:
                    self._members[m.id] = m

    def get_any(self, rid):
        rec = self._pending.get(rid)
        return rec if rec is not None else self._store.get_any(rid)

    def get_prior(self, rid):
        return self._store.get_any(rid)

    def find_member(self, member_id):
        m = self._members.get(member_id)
        return m if m is not None else self._store.find_member(member_id)

    def has_blob(self, digest):
        return self._store.has_blob(digest)

    def item_at(self, release_id, ordinal):
        item = self._pending_items.get((release_id, ordinal))
        return item if item is not None else self._store.item_at(release_id, ordinal)


class Store:
    def __init__(self, root, writable=True, durable=True):
        self.root = Path(root)
        self.writable = writable
        self.durable = durable
        self._ledger_dir = self.root / "ledgers"
        self._blob_dir = self.root / "blobs"
        self._lock = threading.RLock()
        self._lock_fd = None
        self._handles = {}
        self._seq = {name: 0 for name in LEDGER_NAMES}
        self.index = _Index()
        self._clock_last = None
        self.recovery = RecoveryReport()

    # --- lifecycle -------------------------------------------------------

    def _acquire_writer_lock(self):
        fd = os.open(self.root / "LOCK", os.O_RDWR | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(fd)
            raise StoreLocked(f"another writer holds {self.root}/LOCK")
        self._lock_fd = fd

    def close(self):
        with self._lock:
            for handle in self._handles.values():
                handle.close()
            self._handles.clear()
            if self._lock_fd is not None:
                fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
                os.close(self._lock_fd)
                self._lock_fd = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # --- ledgers ---------------------------------------------------------

    def _ledger_path(self, name):
        if name not in LEDGER_NAMES:
            raise UnknownLedger(name)
        return self._ledger_dir / f"{name}.jsonl"

    def _handle(self, name):
        handle = self._handles.get(name)
        if handle is None:
            handle = open(self._ledger_path(name), "ab")
            self._handles[name] = handle
        return handle

    def recover(self) -> RecoveryReport:
        """Drop a truncated/corrupt trailing line per ledger; rebuild after."""
        report = RecoveryReport()
        for name in LEDGER_NAMES:
            path = self._ledger_path(name)
            raw = path.read_bytes() if path.exists() else b""
            if not raw:
                self._seq[name] = 0
                continue
            segments = raw.split(b"\n")
            tail = segments[-1]  # b"" when the file ends with the commit marker
            lines = segments[:-1]
            keep = len(lines)
            prev_seq = 0
            last_valid_seq = 0
            for i, line in enumerate(lines):
                problem = self._check_line(line, prev_seq)
                if problem is None:
                    prev_seq = _line_seq(line)
                    last_valid_seq = prev_seq
                    continue
                is_final_content = i == len(lines) - 1 and not tail
                if is_final_content:
                    keep = i
                    report.dropped.append((name, f"line {i + 1}: {problem}"))
                    break
                raise CorruptionMidLedger(f"{name} line {i + 1}: {problem}")
            if tail:
                report.dropped.append((name, "unterminated trailing line"))
            surviving = b"".join(line + b"\n" for line in lines[:keep])
            if len(surviving) != len(raw) and self.writable:
                if self._handles.get(name):
                    self._handles[name].close()
                    del self._handles[name]
                with open(path, "wb") as fh:
                    fh.write(surviving)
                    fh.flush()
                    if self.durable:
                        os.fsync(fh.fileno())
            self._seq[name] = last_valid_seq
        self.recovery = report
        return report

    @staticmethod
    def _check_line(line, prev_seq):
        try:
            obj = decode_canonical(line)
        except Exception:
            return "unparseable"
        if not isinstance(obj, dict) or set(obj) != {"body", "checksum", "kind", "seq"}:
            return "bad envelope"
        body_bytes = canonical_encode(obj["body"])
        if content_hash(body_bytes) != obj["checksum"]:
            return "checksum mismatch"
        if not isinstance(obj["seq"], int) or obj["seq"] <= prev_seq:
            return "seq not increasing"
        return None

    def rebuild_index(self):
        """Fold every ledger in seq order into a fresh index."""
        index = _Index()
        for name in LEDGER_NAMES:
            path = self._ledger_path(name)
            if not path.exists():
                continue
            for line in path.read_bytes().splitlines():
                if not line:
                    continue
                obj = decode_canonical(line)
                index.apply(record_from_body(obj["kind"], obj["body"]))
        self.index = index
        self._clock_last = index.max_ts
        return self

    def append(self, record) -> int:
        return self.append_batch([record])[0]

    def append_batch(self, records) -> list:
        """Validate collectively, then write; one fsync per touched ledger."""
        if not self.writable:
            raise CurationError("store opened read-only")
        with self._lock:
            catalog = _BatchCatalog(self, records)
            violations = []
            for rec in records:
                for violation in validate_entity(rec, catalog):
                    violations.append(f"{rec.kind}: {violation}")
            if violations:
                raise ValidationFailed(violations)
            touched = []
            seqs = []
            parsed = []
            for rec in records:
                ledger = KIND_TO_LEDGER.get(rec.kind)
                if ledger is None:
                    raise UnknownLedger(rec.kind)
                self._seq[ledger] += 1
                seq = self._seq[ledger]
                body_bytes = canonical_encode(rec.to_record())
                checksum = content_hash(body_bytes)
                line = (
                    b'{"body":'
                    + body_bytes
                    + f',"checksum":"{checksum}","kind":"{rec.kind}","seq":{seq}}}\n'.encode()
                )
                handle = self._handle(ledger)
                handle.write(line)
                if handle not in touched:
                    touched.append(handle)
                seqs.append(seq)
                # index what a rebuild would see: the record parsed back from
                # its canonical bytes, not the caller's in-memory object
                parsed.append(record_from_body(rec.kind, decode_canonical(body_bytes)))
            for handle in touched:
                handle.flush()
                if self.durable:
                    os.fsync(handle.fileno())
            for rec in parsed:
                self.index.apply(rec)
            return seqs

    # --- blobs -----------------------------------------------------------

    def _blob_path(self, digest):
        return self._blob_dir / digest[:2] / digest

    def put_blob(self, data: bytes) -> str:
        digest = content_hash(data)
        path = self._blob_path(digest)
        if path.exists():
            return digest
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.parent / f".tmp-{os.getpid()}-{digest[:12]}"
            with open(tmp, "wb") as fh:
                fh.write(data)
                fh.flush()
                if self.durable:
                    os.fsync(fh.fileno())
            os.replace(tmp, path)
        return digest

    def get_blob(self, digest: str) -> bytes:
        path = self._blob_path(digest)
        if not path.exists():
            raise UnknownBlob(digest)
        return path.read_bytes()

    def has_blob(self, digest: str) -> bool:
        return self._blob_path(digest).exists()

    def blob_digests(self):
        if not self._blob_dir.exists():
            return
        for sub in sorted(self._blob_dir.iterdir()):
            if not sub.is_dir():
                continue
            for entry in sorted(sub.iterdir()):
                if not entry.name.startswith(".tmp-"):
                    yield entry.name

    # --- catalog views ----------------------------------------------------

    def get_any(self, rid):
        return self.index.records.get(rid)

    def get_prior(self, rid):
        return self.get_any(rid)

    def require(self, rid, cls=None):
        rec = self.get_any(rid)
        if rec is None or (cls is not None and not isinstance(rec, cls)):
            from expcurate.errors import UnknownRecord

            raise UnknownRecord(rid)
        return rec

    def find_member(self, member_id):
        for exp in self.experiments():
            m = exp.member(member_id)
            if m is not None:
                return m
        return None

    def member_experiments(self, member_id):
        return [e for e in self.experiments() if e.member(member_id) is not None]

    def item_at(self, release_id, ordinal):
        return self.index.items_by_release.get(release_id, {}).get(ordinal)

    def items_of(self, release_id):
        by_ordinal = self.index.items_by_release.get(release_id, {})
        return [by_ordinal[o] for o in sorted(by_ordinal)]

    def datasets(self):
        return self.index.of_kind("dataset")

    def dataset_by_name(self, name):
        for ds in self.datasets():
            if ds.name == name:
                return ds
        return None

    def releases(self):
        return self.index.of_kind("release")

    def releases_of(self, dataset_id):
        out = [r for r in self.releases() if r.dataset_id == dataset_id]
        return sorted(out, key=lambda r: r.version)

    def latest_version(self, dataset_id) -> int:
        releases = self.releases_of(dataset_id)
        return releases[-1].version if releases else 0

    def experiments(self):
        return self.index.of_kind("experiment")

    def actions(self):
        return self.index.of_kind("action")

    def artefacts(self):
        return self.index.of_kind("artefact")

    def runs(self):
        return self.index.of_kind("run")

    def pipelines(self):
        return self.index.of_kind("pipeline")

    def annotations(self):
        return self.index.of_kind("annotation")

    def tags(self):
        return self.index.of_kind("tag")

    def validations(self):
        return self.index.of_kind("validation")

    def tags_for(self, target):
        return sorted(self.index.tags_by_target.get(target, []), key=lambda t: t.created_at)

    def validations_for(self, target):
        return sorted(
            self.index.validations_by_target.get(target, []), key=lambda v: v.created_at
        )

    def catalogue_of(self, release_id):
        return self.index.catalogues.get(release_id)

    def get_profile(self, release):
        if release.profile_id is None:
            return None
        from dataclasses import replace

        from expcurate.metamodel.types import Profile

        profile = Profile.from_record(decode_canonical(self.get_blob(release.profile_id)))
        return replace(profile, release_id=release.id)

    # --- clock -----------------------------------------------------------

    def next_timestamp(self):
        """Strictly monotone UTC timestamps; total order across ledgers."""
        with self._lock:
            now = utc_now()
            if self._clock_last is not None and now <= self._clock_last:
                now = self._clock_last + timedelta(microseconds=1)
            self._clock_last = now
            return now


def init_store(path, durable=True) -> Store:
    """Create the directory layout; the path must be empty or absent."""
    root = Path(path)
    if root.exists() and any(root.iterdir()):
        raise PathOccupied(str(root))
    (root / "ledgers").mkdir(parents=True, exist_ok=True)
    (root / "blobs").mkdir(parents=True, exist_ok=True)
    for name in LEDGER_NAMES:
        (root / "ledgers" / f"{name}.jsonl").touch()
    (root / "LOCK").touch()
    return open_store(root, durable=durable)


def open_store(path, writable=True, durable=True) -> Store:
    root = Path(path)
    if not (root / "ledgers").is_dir():
        raise CurationError(f"{root} is not a store (no ledgers/ directory)")
    store = Store(root, writable=writable, durable=durable)
    if writable:
        store._acquire_writer_lock()
    store.recover()
    store.rebuild_index()
    return store


def append_record(store: Store, ledger: str, record) -> int:
    """Append to a named ledger; the record kind must belong to it."""
    if ledger not in LEDGER_NAMES:
        raise UnknownLedger(ledger)
    expected = KIND_TO_LEDGER.get(record.kind)
    if expected != ledger:
        raise UnknownLedger(f"record kind {record.kind!r} belongs to {expected!r}, not {ledger!r}")
    return store.append(record)


def _line_seq(line: bytes) -> int:
    return decode_canonical(line)["seq"]
