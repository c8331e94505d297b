import os
import random
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsrc.codec import CodeParameterError, RankDeficientError, RepairInfeasible, new_code
from hsrc.store import (
    ByteLinearMap,
    FragmentFormatError,
    decode_file,
    decode_slice,
    encode_file,
    encode_slice,
    parse_fragment,
    plan_slices,
    repair_file,
    write_fragments,
)

# (q, k, slice_size, n)
PLANS = [(2, 3, 12, 15), (2, 3, 6, 15), (2, 3, 3, 7), (2, 5, 20, 31), (4, 2, 4, 15), (8, 2, 2, 63), (2, 2, 2, 3)]


def test_example_plan():
    plan = plan_slices(5 * 2**20, 8, 80, 20 * 1024, 511)
    assert plan.slice_count == 256
    assert plan.slice_size == 20 * 1024
    assert plan.block_size == 256
    assert plan.padding == 0


def test_plan_edges():
    p = plan_slices(0, 2, 3, 12, 15)
    assert p.slice_count == 1 and p.padding == 12
    p = plan_slices(12, 2, 3, 12, 15)
    assert p.slice_count == 1 and p.padding == 0
    p = plan_slices(13, 2, 3, 12, 15)
    assert p.slice_count == 2 and p.padding == 11
    with pytest.raises(CodeParameterError):
        plan_slices(10, 2, 3, 10, 15)
    with pytest.raises(CodeParameterError):
        plan_slices(10, 2, 3, 12, 16)
    with pytest.raises(CodeParameterError):
        plan_slices(10, 3, 3, 12, 15)


@pytest.mark.parametrize("shape", PLANS)
def test_bulk_matches_reference(shape):
    q, k, size, n = shape
    rng = random.Random(size)
    data = bytes(rng.randrange(256) for _ in range(size * 9 + 1))
    plan = plan_slices(len(data), q, k, size, n)
    frags = [parse_fragment(b) for b in encode_file(data, plan)]
    padded = data + bytes(plan.padding)
    for s in range(plan.slice_count):
        ref = encode_slice(padded[s * size:(s + 1) * size], plan)
        assert [f.payload(s) for f in frags] == ref


@pytest.mark.parametrize("shape", PLANS)
def test_roundtrip_and_erasures(shape):
    q, k, size, n = shape
    rng = random.Random(n * 31 + size)
    for length in (0, 1, size - 1, size, size + 1, 1000):
        data = os.urandom(length)
        plan = plan_slices(length, q, k, size, n)
        frags = encode_file(data, plan)
        assert len(frags) == n
        assert decode_file(frags) == data
        c = plan.code
        for _ in range(5):
            keep = rng.sample(range(n), k + rng.randrange(n - k + 1))
            try:
                out = decode_file([frags[i] for i in keep])
            except RankDeficientError:
                from hsrc.galois import rank_over_base

                assert rank_over_base([c.alpha(i + 1) for i in keep], c.field) < k
                continue
            assert out == data


def test_zero_file():
    plan = plan_slices(100, 2, 3, 12, 15)
    for blob in encode_file(bytes(100), plan):
        assert set(parse_fragment(blob).body) <= {0}


def test_subset_decode_equals_full():
    data = os.urandom(777)
    plan = plan_slices(len(data), 2, 3, 6, 15)
    frags = encode_file(data, plan)
    assert decode_file([frags[0], frags[1], frags[3]]) == decode_file(frags) == data


def test_rank_deficient_names_rank():
    data = os.urandom(50)
    plan = plan_slices(len(data), 2, 3, 6, 15)
    frags = encode_file(data, plan)
    # indices 1, 2, 3 span only two dimensions (1 + 2 = 3)
    with pytest.raises(RankDeficientError, match="rank deficient: 2 found"):
        decode_file(frags[:3])


def test_pair_repair_layout_small_code():
    data = os.urandom(300)
    plan = plan_slices(len(data), 2, 3, 3, 7)
    frags = encode_file(data, plan)
    ex = new_code(2, 3, 12, 7)
    w = ex.field.w
    i1, i2, i5 = (ex.index_of(w**p) for p in (1, 2, 5))
    result = repair_file(i5, [frags[i1 - 1], frags[i2 - 1]], plan)
    assert result.fragment == frags[i5 - 1]
    assert result.downloads == 2
    assert sorted(result.sources) == sorted((i1, i2))


@pytest.mark.parametrize("shape", PLANS)
def test_repair_every_index(shape):
    q, k, size, n = shape
    data = os.urandom(size * 20 + 3)
    plan = plan_slices(len(data), q, k, size, n)
    frags = encode_file(data, plan)
    for i in range(1, n + 1):
        result = repair_file(i, frags[: i - 1] + frags[i:], plan)
        assert result.fragment == frags[i - 1]
        assert result.downloads == 2


def test_repair_zero_file():
    plan = plan_slices(60, 2, 3, 6, 15)
    frags = encode_file(bytes(60), plan)
    out = parse_fragment(repair_file(4, frags[4:], plan).fragment)
    assert set(out.body) == {0}


def test_repair_infeasible():
    plan = plan_slices(60, 2, 3, 6, 15)
    frags = encode_file(os.urandom(60), plan)
    with pytest.raises(RepairInfeasible, match="pair-repair infeasible; full decode required"):
        repair_file(5, [frags[0], frags[1]], plan)


def test_header_layout():
    data = b"hello world"
    plan = plan_slices(len(data), 2, 3, 6, 15)
    blob = encode_file(data, plan)[4]
    magic, version, t, e, _, n, k, M, size, first, count, index, length, payload = struct.unpack_from(
        "<4sBBBBIIIIIIIQI", blob
    )
    assert (magic, version, t, e, n, k, M) == (b"HSRC", 1, 1, 4, 15, 3, plan.M)
    assert (size, first, count, index, length, payload) == (6, 0, 2, 5, 11, plan.payload_size)
    f = parse_fragment(blob)
    assert f.fragment_index == 5 and f.plan == plan
    assert len(blob) == 48 + payload * (1 + count)


def test_fragments_are_deterministic():
    data = bytes(range(256)) * 3
    plan = plan_slices(len(data), 2, 3, 12, 15)
    assert encode_file(data, plan) == encode_file(data, plan)


def test_corrupt_headers():
    plan = plan_slices(40, 2, 3, 6, 15)
    blob = encode_file(os.urandom(40), plan)[0]
    with pytest.raises(FragmentFormatError, match="not an HSRC fragment"):
        parse_fragment(b"XXXX" + blob[4:])
    with pytest.raises(FragmentFormatError, match="not an HSRC fragment"):
        parse_fragment(b"HS")
    with pytest.raises(FragmentFormatError, match="payload length mismatch"):
        parse_fragment(blob[:-1])
    with pytest.raises(FragmentFormatError, match="alpha coordinates"):
        tampered = bytearray(blob)
        tampered[48] ^= 1
        parse_fragment(bytes(tampered))
    with pytest.raises(FragmentFormatError, match="version"):
        parse_fragment(blob[:4] + b"\x02" + blob[5:])


def test_mixed_plans_rejected():
    a = encode_file(os.urandom(40), plan_slices(40, 2, 3, 6, 15))
    b = encode_file(os.urandom(41), plan_slices(41, 2, 3, 6, 15))
    with pytest.raises(FragmentFormatError, match="different plan"):
        decode_file(a[:2] + b[2:4])


def test_files_on_disk(tmp_path):
    data = os.urandom(5000)
    src = tmp_path / "obj.bin"
    src.write_bytes(data)
    plan = plan_slices(len(data), 2, 3, 12, 15)
    paths = write_fragments(encode_file(src, plan), tmp_path / "frags")
    assert len(paths) == 15
    assert decode_file(paths[5:]) == data
    with pytest.raises(OSError, match="missing.bin"):
        encode_file(tmp_path / "missing.bin", plan)
    with pytest.raises(OSError, match="nope.hsrc"):
        decode_file([tmp_path / "nope.hsrc"])


def test_byte_linear_map_matches_function():
    rng = np.random.default_rng(0)
    matrix = rng.integers(0, 2, size=(24, 16), dtype=np.uint8)

    def fn(data: bytes) -> bytes:
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
        return np.packbits(bits @ matrix % 2, bitorder="little").tobytes()

    m = ByteLinearMap(3, 2, fn)
    rows = rng.integers(0, 256, size=(50, 3), dtype=np.uint8)
    out = m.apply(rows)
    for r, o in zip(rows, out):
        assert o.tobytes() == fn(r.tobytes())


def test_decode_slice_reference():
    plan = plan_slices(12, 2, 3, 12, 15)
    data = os.urandom(12)
    payloads = encode_slice(data, plan)
    assert decode_slice({1: payloads[0], 2: payloads[1], 4: payloads[3]}, plan) == data


@settings(max_examples=25, deadline=None)
@given(data=st.binary(min_size=0, max_size=3000), lost=st.integers(1, 15), size=st.sampled_from([6, 12]))
def test_pipeline_property(data, lost, size):
    plan = plan_slices(len(data), 2, 3, size, 15)
    frags = encode_file(data, plan)
    rest = frags[: lost - 1] + frags[lost:]
    rebuilt = repair_file(lost, rest, plan)
    assert rebuilt.fragment == frags[lost - 1]
    assert decode_file(rest + [rebuilt.fragment]) == data
