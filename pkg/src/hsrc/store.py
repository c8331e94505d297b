"""Whole-object pipeline: slicing, padding, fragment files, repair.

An object is cut into equal slices of ``slice_size`` bytes (the last one
zero padded).  Each slice is split into ``k`` source blocks of
``slice_size / k`` bytes; a block's bits, little-endian within bytes, are
grouped ``t`` at a time into base-field symbols, giving one coefficient of
``F_{q^d}``.  Fragment ``j`` of every slice lands in fragment file ``j``.

Fragment file layout (all integers little-endian)::

    magic "HSRC" | version u8 = 1 | t u8 | e u8 | reserved u8
    n u32 | k u32 | M u32 | slice_size u32 | slice_index u32 | slice_count u32
    fragment_index u32 | original_length u64 | payload_length u32
    alpha coordinates (payload_length bytes)
    slice_count payloads of payload_length bytes each

A payload holds the ``d = M/k`` coordinate symbols of one encoded value,
``t`` bits each, packed little-endian.

Encoding, decoding and repair are F_2-linear on these bit strings, so the
bulk path applies per-byte lookup tables derived once from the reference
field arithmetic in :mod:`hsrc.codec`.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .codec import (
    CodeParameterError,
    CodeParams,
    Fragment,
    RepairInfeasible,
    decode,
    evaluate,
    log2_exact,
    moore_row,
    new_code,
    repair_pairs,
    select_decoding_set,
    solve,
    validate_shape,
)

MAGIC = b"HSRC"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBIIIIIIIQI")


class FragmentFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SlicePlan:
    original_length: int
    slice_count: int
    slice_size: int
    q: int
    k: int
    n: int

    @property
    def t(self) -> int:
        return log2_exact(self.q)

    @property
    def block_size(self) -> int:
        """Object bytes carried by each encoded block."""
        return self.slice_size // self.k

    @property
    def d(self) -> int:
        return -(-8 * self.block_size // self.t)

    @property
    def M(self) -> int:
        return self.k * self.d

    @property
    def e(self) -> int:
        return validate_shape(self.q, self.k, self.M, self.n)[2]

    @property
    def payload_size(self) -> int:
        return -(-self.d * self.t // 8)

    @property
    def padding(self) -> int:
        return self.slice_count * self.slice_size - self.original_length

    @cached_property
    def code(self) -> CodeParams:
        return new_code(self.q, self.k, self.M, self.n)


def plan_slices(file_length: int, q: int, k: int, target_slice_size: int, n: int) -> SlicePlan:
    """Slice plan for an object of ``file_length`` bytes.

    ``target_slice_size`` must split into ``k`` whole-byte blocks.
    """
    if file_length < 0:
        raise ValueError("file_length must be >= 0")
    if log2_exact(q) is None:
        raise CodeParameterError(f"q={q} is not a power of 2")
    if target_slice_size < k or target_slice_size % k:
        raise CodeParameterError(f"slice size {target_slice_size} does not split into k={k} whole-byte blocks")
    plan = SlicePlan(file_length, max(1, math.ceil(file_length / target_slice_size)), target_slice_size, q, k, n)
    validate_shape(q, k, plan.M, n)
    return plan


# -- reference (field arithmetic) slice operations -------------------------


def _block_coefficient(block: bytes, code: CodeParams):
    return code.field(code.field.from_coordinate_bits(int.from_bytes(block, "little")))


def _payload_bytes(value, plan: SlicePlan) -> bytes:
    return plan.code.field.coordinate_bits(value.value).to_bytes(plan.payload_size, "little")


def _payload_value(payload: bytes, plan: SlicePlan):
    bits = int.from_bytes(payload, "little") & ((1 << plan.d * plan.t) - 1)
    return plan.code.field(plan.code.field.from_coordinate_bits(bits))


def encode_slice(data: bytes, plan: SlicePlan) -> list[bytes]:
    """Encode one slice with field arithmetic; returns the n payloads."""
    c = plan.code
    b = plan.block_size
    coeffs = [_block_coefficient(data[i * b:(i + 1) * b], c) for i in range(c.k)]
    return [_payload_bytes(evaluate(coeffs, a), plan) for a in c.alphas]


def decode_slice(payloads: dict[int, bytes], plan: SlicePlan) -> bytes:
    """Decode one slice from ``{fragment_index: payload}``."""
    c = plan.code
    frags = [Fragment(c.alpha(i), _payload_value(p, plan), i) for i, p in payloads.items()]
    obj = decode(frags, c)
    b = plan.block_size
    out = bytearray()
    for coeff in obj.coefficients(c):
        bits = c.field.coordinate_bits(coeff.value)
        out += (bits & ((1 << 8 * b) - 1)).to_bytes(b, "little")
    return bytes(out)


# -- bulk path -------------------------------------------------------------


class ByteLinearMap:
    """An F_2-linear map between fixed-size byte strings, applied row-wise
    to uint8 arrays by XOR-ing one 256-entry table per input byte."""

    def __init__(self, in_bytes: int, out_bytes: int, fn: Callable[[bytes], bytes]):
        self.in_bytes = in_bytes
        self.out_bytes = out_bytes
        columns = []
        for bit in range(8 * in_bytes):
            unit = (1 << bit).to_bytes(in_bytes, "little")
            columns.append(np.frombuffer(fn(unit), dtype=np.uint8))
        tables = np.zeros((in_bytes, 256, out_bytes), dtype=np.uint8)
        for pos in range(in_bytes):
            for value in range(1, 256):
                low = value & -value
                tables[pos, value] = tables[pos, value ^ low] ^ columns[8 * pos + low.bit_length() - 1]
        self.tables = tables

    def apply(self, rows: np.ndarray) -> np.ndarray:
        out = np.zeros((rows.shape[0], self.out_bytes), dtype=np.uint8)
        for pos in range(self.in_bytes):
            out ^= self.tables[pos][rows[:, pos]]
        return out


@lru_cache(maxsize=32)
def _encoder(plan_key: SlicePlan) -> ByteLinearMap:
    plan = plan_key
    return ByteLinearMap(plan.slice_size, plan.n * plan.payload_size, lambda s: b"".join(encode_slice(s, plan)))


@lru_cache(maxsize=64)
def _decoder(plan_key: SlicePlan, indices: tuple[int, ...]) -> ByteLinearMap:
    plan = plan_key
    c = plan.code
    p, b = plan.payload_size, plan.block_size
    # Invert the Moore matrix once: column j solves for a unit value at point j.
    matrix = [moore_row(c.alpha(i), c.k) for i in indices]
    unit = [[c.field.one if r == j else c.field.zero for r in range(c.k)] for j in range(c.k)]
    inverse_cols = [solve(matrix, rhs) for rhs in unit]

    def fn(data: bytes) -> bytes:
        coeffs = [c.field.zero] * c.k
        for j in range(c.k):
            value = _payload_value(data[j * p:(j + 1) * p], plan)
            if value:
                coeffs = [acc + col * value for acc, col in zip(coeffs, inverse_cols[j])]
        mask = (1 << 8 * b) - 1
        return b"".join((c.field.coordinate_bits(x.value) & mask).to_bytes(b, "little") for x in coeffs)

    return ByteLinearMap(len(indices) * p, plan.slice_size, fn)


@lru_cache(maxsize=256)
def _repairer(plan_key: SlicePlan, target: int, beta: int, gamma: int) -> ByteLinearMap:
    plan = plan_key
    c = plan.code
    pair = next(
        pr for pr in repair_pairs(c.alpha(target), [c.alpha(beta), c.alpha(gamma)], c)
    )
    p = plan.payload_size

    def fn(data: bytes) -> bytes:
        vb = _payload_value(data[:p], plan)
        vg = _payload_value(data[p:], plan)
        return _payload_bytes(pair.combine(vb, vg), plan)

    return ByteLinearMap(2 * p, p, fn)


def _cache_key(plan: SlicePlan) -> SlicePlan:
    # Tables depend only on the code shape and slice size.
    return replace(plan, original_length=0, slice_count=1)


# -- fragment files ----------------------------------------------------------


@dataclass(frozen=True)
class FragmentFile:
    plan: SlicePlan
    fragment_index: int
    slice_index: int
    body: bytes

    def payload(self, slice_number: int) -> bytes:
        p = self.plan.payload_size
        return self.body[slice_number * p:(slice_number + 1) * p]

    def to_bytes(self) -> bytes:
        plan = self.plan
        alpha = plan.code.alpha(self.fragment_index)
        header = _HEADER.pack(
            MAGIC, VERSION, plan.t, plan.e, 0, plan.n, plan.k, plan.M, plan.slice_size,
            self.slice_index, plan.slice_count, self.fragment_index, plan.original_length, plan.payload_size,
        )
        return header + _payload_bytes(alpha, plan) + self.body


def parse_fragment(blob: bytes) -> FragmentFile:
    if len(blob) < _HEADER.size or blob[:4] != MAGIC:
        raise FragmentFormatError("not an HSRC fragment")
    (_, version, t, e, _, n, k, M, slice_size, slice_index, slice_count,
     index, original_length, payload_length) = _HEADER.unpack_from(blob)
    if version != VERSION:
        raise FragmentFormatError(f"unsupported fragment format version {version}")
    plan = SlicePlan(original_length, slice_count, slice_size, 1 << t, k, n)
    if plan.M != M or plan.e != e or plan.payload_size != payload_length:
        raise FragmentFormatError("inconsistent fragment header")
    if not 1 <= index <= n:
        raise FragmentFormatError(f"fragment index {index} outside 1..{n}")
    start = _HEADER.size
    alpha = blob[start:start + payload_length]
    body = blob[start + payload_length:]
    if len(alpha) != payload_length or len(body) != slice_count * payload_length:
        raise FragmentFormatError("payload length mismatch")
    if _payload_value(alpha, plan) != plan.code.alpha(index):
        raise FragmentFormatError(f"alpha coordinates do not match fragment index {index}")
    return FragmentFile(plan, index, slice_index, body)


def _load(fragment) -> FragmentFile:
    if isinstance(fragment, FragmentFile):
        return fragment
    if isinstance(fragment, (str, os.PathLike)):
        try:
            return parse_fragment(Path(fragment).read_bytes())
        except OSError as exc:
            raise OSError(f"{fragment}: {exc.strerror or exc}") from exc
        except FragmentFormatError as exc:
            raise FragmentFormatError(f"{fragment}: {exc}") from exc
    return parse_fragment(bytes(fragment))


def _read_input(data) -> bytes:
    if isinstance(data, (bytes, bytearray, memoryview)):
        return bytes(data)
    try:
        return Path(data).read_bytes()
    except OSError as exc:
        raise OSError(f"{data}: {exc.strerror or exc}") from exc


def encode_file(data, plan: SlicePlan) -> list[bytes]:
    """Encode ``data`` (bytes or a path); returns the n fragment files."""
    raw = _read_input(data)
    if len(raw) != plan.original_length:
        raise ValueError(f"plan is for {plan.original_length} bytes, input has {len(raw)}")
    padded = raw + bytes(plan.slice_count * plan.slice_size - len(raw))
    rows = np.frombuffer(padded, dtype=np.uint8).reshape(plan.slice_count, plan.slice_size)
    encoded = _encoder(_cache_key(plan)).apply(rows)
    p = plan.payload_size
    return [
        FragmentFile(plan, j, 0, encoded[:, (j - 1) * p:j * p].tobytes()).to_bytes()
        for j in range(1, plan.n + 1)
    ]


def _collect(fragments: Sequence, plan: SlicePlan | None) -> tuple[SlicePlan, dict[int, FragmentFile]]:
    files = [_load(f) for f in fragments]
    if not files:
        raise ValueError("no fragments given")
    plan = plan or files[0].plan
    by_index: dict[int, FragmentFile] = {}
    for f in files:
        if f.plan != plan:
            raise FragmentFormatError(f"fragment {f.fragment_index} belongs to a different plan")
        by_index.setdefault(f.fragment_index, f)
    return plan, by_index


def decode_file(fragments: Sequence, plan: SlicePlan | None = None) -> bytes:
    """Rebuild the original bytes from fragment files (bytes, paths or parsed).

    The decoding set is chosen once by fragment index and reused for every
    slice, since fragment j of all slices is co-located.
    """
    plan, by_index = _collect(fragments, plan)
    c = plan.code
    points = select_decoding_set([c.alpha(i) for i in by_index], c)
    indices = tuple(c.index_of(a) for a in points)
    p = plan.payload_size
    stacked = np.concatenate(
        [np.frombuffer(by_index[i].body, dtype=np.uint8).reshape(plan.slice_count, p) for i in indices], axis=1
    )
    out = _decoder(_cache_key(plan), indices).apply(stacked)
    return out.tobytes()[: plan.original_length]


@dataclass(frozen=True)
class RepairResult:
    fragment: bytes
    downloads: int
    sources: tuple[int, int]


def repair_file(missing_index: int, fragments: Sequence, plan: SlicePlan | None = None) -> RepairResult:
    """Regenerate fragment file ``missing_index`` from two available ones."""
    plan, by_index = _collect(fragments, plan)
    c = plan.code
    by_index.pop(missing_index, None)
    pairs = repair_pairs(c.alpha(missing_index), [c.alpha(i) for i in by_index], c)
    if not pairs:
        raise RepairInfeasible("pair-repair infeasible; full decode required")
    beta, gamma = c.index_of(pairs[0].beta), c.index_of(pairs[0].gamma)
    p = plan.payload_size
    stacked = np.concatenate(
        [np.frombuffer(by_index[i].body, dtype=np.uint8).reshape(plan.slice_count, p) for i in (beta, gamma)],
        axis=1,
    )
    body = _repairer(_cache_key(plan), missing_index, beta, gamma).apply(stacked).tobytes()
    blob = FragmentFile(plan, missing_index, 0, body).to_bytes()
    return RepairResult(blob, 2, (beta, gamma))


def write_fragments(blobs: Sequence[bytes], directory, stem: str = "fragment") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, blob in enumerate(blobs, start=1):
        path = directory / f"{stem}.{j:04d}.hsrc"
        path.write_bytes(blob)
        paths.append(path)
    return paths
