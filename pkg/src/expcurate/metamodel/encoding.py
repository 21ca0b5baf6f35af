"""Canonical byte encoding, content hashing, identifiers and timestamps.

The canonical encoding is the bit-exact contract for everything that gets
hashed or written to a ledger: UTF-8 JSON with map keys sorted by code
point, no insignificant whitespace, list order preserved. Floats never
enter the encoding directly; they are converted to decimal strings with 17
significant digits first, which round-trips any IEEE double and keeps the
bytes stable across platforms.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import secrets
from datetime import datetime, timezone

from expcurate.errors import EncodingError


def format_decimal(value: float) -> str:
    """17-significant-digit decimal string for a finite float."""
    if not math.isfinite(value):
        raise EncodingError(f"non-finite float not encodable: {value!r}")
    return format(value, ".17g")


def _normalize(value, path: str):
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return format_decimal(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return [_normalize(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(value, dict):
        out = {}
        for key, v in value.items():
            if not isinstance(key, str):
                raise EncodingError(f"non-text map key at {path}: {key!r}")
            out[key] = _normalize(v, f"{path}.{key}")
        return out
    raise EncodingError(f"value kind {type(value).__name__} at {path} is not encodable")


def canonical_encode(record) -> bytes:
    """Deterministic bytes for a record of maps/lists/text/ints/bools/decimal-strings."""
    normalized = _normalize(record, "$")
    return json.dumps(
        normalized, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ).encode("utf-8")


def decode_canonical(data: bytes):
    """Inverse of canonical_encode up to float-stringification."""
    return json.loads(data.decode("utf-8"))


def content_hash(data: bytes) -> str:
    """Lowercase 64-hex SHA-256 digest."""
    return hashlib.sha256(data).hexdigest()


def new_id(kind: str) -> str:
    """Random `kind-<base32 of 10 bytes>` token; uniqueness is the store's job."""
    token = base64.b32encode(secrets.token_bytes(10)).decode("ascii").lower()
    return f"{kind}-{token}"


def id_kind(identifier: str) -> str:
    return identifier.split("-", 1)[0]


def format_timestamp(dt: datetime) -> str:
    """UTC ISO-8601 with microseconds and a trailing Z."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 parser accepting Z suffix and date-only forms; naive means UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise EncodingError(f"not an ISO-8601 timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
