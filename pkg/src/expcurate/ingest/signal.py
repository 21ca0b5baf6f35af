"""XSAC signal traces: a plain-text, bit-exact format for one axis per file.

    XSAC 1
    station_id=ST01
    channel_id=HHZ
    axis=Z
    sample_rate_hz=100
    start_time=2024-03-01T00:00:00.000000Z
    n_samples=3
    DATA
    0.5 -0.25 1

Samples are written with 17 significant digits so a write/read round trip
reproduces every value exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from expcurate.errors import HeaderMalformed, SampleCountMismatch
from expcurate.metamodel import format_decimal, format_timestamp, parse_timestamp

AXES = ("X", "Y", "Z")
_HEADER_KEYS = (
    "station_id",
    "channel_id",
    "axis",
    "sample_rate_hz",
    "start_time",
    "n_samples",
)
_SAMPLES_PER_LINE = 8


@dataclass(frozen=True)
class SignalTrace:
    station_id: str
    channel_id: str
    axis: str
    sample_rate_hz: float
    start_time: datetime
    samples: tuple  # of float

    @property
    def n_samples(self):
        return len(self.samples)

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate_hz


def read_xsac(source) -> SignalTrace:
    """Parse XSAC bytes or a file path."""
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "XSAC 1":
        raise HeaderMalformed("missing 'XSAC 1' magic line")
    fields = {}
    data_at = None
    for i, line in enumerate(lines[1:], start=1):
        stripped = line.strip()
        if stripped == "DATA":
            data_at = i + 1
            break
        if "=" not in stripped:
            raise HeaderMalformed(f"line {i + 1}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        if key not in _HEADER_KEYS:
            raise HeaderMalformed(f"line {i + 1}: unknown header key {key!r}")
        if key in fields:
            raise HeaderMalformed(f"line {i + 1}: duplicate header key {key!r}")
        fields[key] = value
    if data_at is None:
        raise HeaderMalformed("missing DATA line")
    missing = [k for k in _HEADER_KEYS if k not in fields]
    if missing:
        raise HeaderMalformed(f"missing header keys: {', '.join(missing)}")
    if fields["axis"] not in AXES:
        raise HeaderMalformed(f"axis must be one of {AXES}")
    try:
        sample_rate = float(fields["sample_rate_hz"])
        n_samples = int(fields["n_samples"])
        start_time = parse_timestamp(fields["start_time"])
    except Exception as exc:
        raise HeaderMalformed(str(exc))
    if sample_rate <= 0:
        raise HeaderMalformed("sample_rate_hz must be positive")
    tokens = " ".join(lines[data_at:]).split()
    if len(tokens) != n_samples:
        raise SampleCountMismatch(f"declared {n_samples}, found {len(tokens)}")
    try:
        samples = tuple(float(t) for t in tokens)
    except ValueError as exc:
        raise HeaderMalformed(f"bad decimal sample: {exc}")
    return SignalTrace(
        station_id=fields["station_id"],
        channel_id=fields["channel_id"],
        axis=fields["axis"],
        sample_rate_hz=sample_rate,
        start_time=start_time,
        samples=samples,
    )


def write_xsac(trace: SignalTrace) -> bytes:
    out = [
        "XSAC 1",
        f"station_id={trace.station_id}",
        f"channel_id={trace.channel_id}",
        f"axis={trace.axis}",
        f"sample_rate_hz={format_decimal(trace.sample_rate_hz)}",
        f"start_time={format_timestamp(trace.start_time)}",
        f"n_samples={len(trace.samples)}",
        "DATA",
    ]
    for i in range(0, len(trace.samples), _SAMPLES_PER_LINE):
        chunk = trace.samples[i : i + _SAMPLES_PER_LINE]
        out.append(" ".join(format_decimal(s) for s in chunk))
    return ("\n".join(out) + "\n").encode("utf-8")
