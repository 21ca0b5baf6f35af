import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expcurate.errors import EncodingError
from expcurate.metamodel import (
    canonical_encode,
    content_hash,
    decode_canonical,
    format_decimal,
    format_timestamp,
    new_id,
    parse_timestamp,
)

SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
SHA256_ABC = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


class TestCanonicalEncode:
    def test_map_keys_sorted_by_code_point(self):
        assert canonical_encode({"b": 1, "a": "x"}) == b'{"a":"x","b":1}'

    def test_empty_map(self):
        assert canonical_encode({}) == b"{}"

    def test_list_order_preserved(self):
        assert canonical_encode([2, 1]) == b"[2,1]"
        assert canonical_encode({"v": [[2, 1], [1, 2]]}) == b'{"v":[[2,1],[1,2]]}'

    def test_floats_become_17_digit_decimal_strings(self):
        assert canonical_encode({"f": 0.5}) == b'{"f":"0.5"}'
        assert canonical_encode({"f": 0.9}) == b'{"f":"0.90000000000000002"}'

    def test_no_insignificant_whitespace(self):
        data = canonical_encode({"a": [1, 2], "b": {"c": True}})
        assert b" " not in data

    def test_unicode_keys_sort_by_code_point(self):
        # "Z" (0x5A) sorts before "a" (0x61)
        assert canonical_encode({"a": 1, "Z": 2}) == b'{"Z":2,"a":1}'

    @pytest.mark.parametrize("bad", [None, b"bytes", {1: "x"}, float("nan"), float("inf")])
    def test_non_encodable_values(self, bad):
        with pytest.raises(EncodingError):
            canonical_encode({"v": bad} if not isinstance(bad, dict) else bad)

    def test_17_digits_round_trip_every_double(self):
        for value in [0.1, 1 / 3, 2.0**-40, 1e300, -0.0, 123456.789]:
            assert float(format_decimal(value)) == value


json_scalars = st.one_of(
    st.booleans(),
    st.integers(min_value=-(2**53), max_value=2**53),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=20),
)
json_values = st.recursive(
    json_scalars,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(st.text(max_size=8), children, max_size=4),
    ),
    max_leaves=20,
)


def _normalized(value):
    if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
        return value
    if isinstance(value, float):
        return format_decimal(value)
    if isinstance(value, list):
        return [_normalized(v) for v in value]
    return {k: _normalized(v) for k, v in value.items()}


class TestRoundTrip:
    @given(json_values)
    @settings(max_examples=200)
    def test_decode_recovers_normalized_value(self, value):
        assert decode_canonical(canonical_encode(value)) == _normalized(value)

    @given(json_values)
    @settings(max_examples=100)
    def test_encoding_is_deterministic(self, value):
        assert canonical_encode(value) == canonical_encode(value)


class TestContentHash:
    def test_empty_input_vector(self):
        assert content_hash(b"") == SHA256_EMPTY

    def test_abc_vector(self):
        assert content_hash(b"abc") == SHA256_ABC

    def test_same_bytes_same_digest(self):
        assert content_hash(b"xyz") == content_hash(b"xyz")

    def test_lowercase_64_hex(self):
        digest = content_hash(b"whatever")
        assert len(digest) == 64
        assert digest == digest.lower()

    def test_stable_across_process_restarts(self):
        record = {"name": "stability", "values": [1, 2.5, True], "nested": {"a": 0.1}}
        expected = content_hash(canonical_encode(record))
        code = (
            "from expcurate.metamodel import canonical_encode, content_hash;"
            "print(content_hash(canonical_encode("
            "{'name': 'stability', 'values': [1, 2.5, True], 'nested': {'a': 0.1}})))"
        )
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == expected


class TestIdsAndTimestamps:
    def test_id_shape(self):
        token = new_id("rel")
        kind, _, suffix = token.partition("-")
        assert kind == "rel"
        assert len(suffix) == 16  # base32 of 10 random bytes

    def test_ids_differ(self):
        assert len({new_id("x") for _ in range(100)}) == 100

    def test_timestamp_round_trip(self):
        iso = "2023-02-01T10:00:00.000000Z"
        assert format_timestamp(parse_timestamp(iso)) == iso

    def test_z_suffix_and_offset_forms(self):
        a = parse_timestamp("2023-02-01T10:00:00Z")
        b = parse_timestamp("2023-02-01T10:00:00+00:00")
        assert a == b

    def test_date_only(self):
        assert parse_timestamp("2023-02-01").hour == 0

    def test_garbage_rejected(self):
        with pytest.raises(EncodingError):
            parse_timestamp("sometime ago")
