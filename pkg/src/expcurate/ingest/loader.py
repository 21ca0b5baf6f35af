"""Loading staged payloads into the catalog as versioned, profiled releases."""

from __future__ import annotations

from dataclasses import dataclass, replace

from expcurate.errors import UnknownBlob, UnknownRecord
from expcurate.metamodel import canonical_encode, new_id
from expcurate.metamodel.types import (
    CatalogueAssignment,
    Dataset,
    Item,
    Provenance,
    Release,
)
from expcurate.ingest.profile import profile_signal, profile_table, profile_texts
from expcurate.ingest.signal import SignalTrace, write_xsac
from expcurate.ingest.tabular import StagedTable, table_to_payload
from expcurate.store import Store


@dataclass(frozen=True)
class LoadResult:
    release: Release
    profile: object
    items: tuple
    catalogue: CatalogueAssignment

    @property
    def records(self):
        """Records for one append batch: release, items, catalogue assignment."""
        return [self.release, *self.items, self.catalogue]


def create_dataset(store: Store, name, description="", domain="") -> Dataset:
    dataset = Dataset(
        id=new_id("ds"),
        name=name,
        description=description,
        domain=domain,
        created_at=store.next_timestamp(),
    )
    store.append(dataset)
    return dataset


def size_bucket(size_bytes: int) -> str:
    if size_bytes < 1_000_000:
        return "<1MB"
    if size_bytes <= 100_000_000:
        return "1-100MB"
    return ">100MB"


def staged_payload(staged) -> bytes:
    if isinstance(staged, StagedTable):
        return table_to_payload(staged)
    if isinstance(staged, SignalTrace):
        return write_xsac(staged)
    if isinstance(staged, (list, tuple)) and all(isinstance(t, str) for t in staged):
        return canonical_encode({"texts": list(staged)})
    raise UnknownRecord(f"cannot stage payload of type {type(staged).__name__}")


def prepare_release(
    store: Store,
    dataset_id: str,
    staged,
    *,
    content_kind: str,
    license="unspecified",
    provenance: Provenance = None,
    external_id_column=None,
    media_hash_column=None,
    when=None,
) -> LoadResult:
    """Blob the payload and build Release/Item/Catalogue records without appending.

    Callers that also record a producing Action append everything as one
    batch so the cross references validate together. Deterministic: the
    same staged value always yields the same payload bytes, content hash
    and profile.
    """
    store.require(dataset_id, Dataset)
    payload = staged_payload(staged)
    digest = store.put_blob(payload)
    when = when or store.next_timestamp()
    release_id = new_id("rel")

    if isinstance(staged, StagedTable):
        profile = profile_table(staged)
    elif isinstance(staged, SignalTrace):
        profile = profile_signal(staged)
    else:
        profile = profile_texts(staged)
    profile_id = store.put_blob(canonical_encode(profile.to_record()))
    profile = replace(profile, release_id=release_id)

    release = Release(
        id=release_id,
        dataset_id=dataset_id,
        version=store.latest_version(dataset_id) + 1,
        license=license,
        size_bytes=len(payload),
        provenance=provenance or Provenance(kind="external", ref="unspecified"),
        content_kind=content_kind,
        content_hash=digest,
        created_at=when,
        profile_id=profile_id,
    )
    items = _materialize_items(
        store,
        release,
        staged,
        payload_digest=digest,
        external_id_column=external_id_column,
        media_hash_column=media_hash_column,
    )
    catalogue = CatalogueAssignment(
        release_id=release_id,
        day=when.strftime("%Y-%m-%d"),
        size_bucket=size_bucket(len(payload)),
        format_kind=content_kind,
    )
    return LoadResult(release=release, profile=profile, items=tuple(items), catalogue=catalogue)


def load_release(store: Store, dataset_id: str, staged, **kwargs) -> LoadResult:
    """prepare_release + append; the everyday entry point."""
    result = prepare_release(store, dataset_id, staged, **kwargs)
    store.append_batch(result.records)
    return result


def _materialize_items(store, release, staged, payload_digest, external_id_column, media_hash_column):
    items = []
    if isinstance(staged, SignalTrace):
        items.append(
            Item(
                id=new_id("item"),
                release_id=release.id,
                ordinal=0,
                payload={"blob": payload_digest},
                external_id=f"{staged.station_id}/{staged.channel_id}/{staged.axis}",
            )
        )
        return items
    if isinstance(staged, StagedTable):
        ext_idx = staged.column_index(external_id_column) if external_id_column else None
        media_idx = staged.column_index(media_hash_column) if media_hash_column else None
        for i, row in enumerate(staged.rows):
            if media_idx is not None:
                digest = row[media_idx]
                if not store.has_blob(digest):
                    raise UnknownBlob(digest)
                payload = {"blob": digest, "row": i}
            else:
                payload = {"row": i}
            items.append(
                Item(
                    id=new_id("item"),
                    release_id=release.id,
                    ordinal=i,
                    payload=payload,
                    external_id=row[ext_idx] if ext_idx is not None else None,
                )
            )
        return items
    for i, text in enumerate(staged):
        items.append(
            Item(id=new_id("item"), release_id=release.id, ordinal=i, payload=text)
        )
    return items


def release_table(store: Store, release: Release) -> StagedTable:
    """Fetch and decode a tabular release payload."""
    from expcurate.ingest.tabular import payload_to_table

    return payload_to_table(store.get_blob(release.content_hash), source_uri=release.id)


def release_trace(store: Store, release: Release) -> SignalTrace:
    from expcurate.ingest.signal import read_xsac

    return read_xsac(store.get_blob(release.content_hash))


def release_texts(store: Store, release: Release):
    from expcurate.metamodel import decode_canonical

    return decode_canonical(store.get_blob(release.content_hash))["texts"]
