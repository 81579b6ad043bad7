"""M-frame bitstream syntax.

Layout (every multi-bit field MSB first, see docs/bitstream.md):

    header        magic "MFRM", version, dimensions, block edge, scan,
                  Q (float64), QP_M, N, mode, lambda (float64)
    mode map      ue(bits) + arithmetic-coded SKIP/INTRA/MERGE per block
    merge EOBs    ue(E + 1) per MERGE block, raster order
    frequencies   for k = 0 .. max EOB: [fallback flag] ue(W - 1) [spikes]
    shifts        ue(bits) + arithmetic-coded shifts, k-major, raster order
    intra blocks  ue(E + 1) se(v)... per INTRA block
    trailer       byte alignment, CRC-32 of everything before it
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np

from .bitstream import BitReader, BitWriter
from .distribution import PROB_BITS, ShiftDistribution, from_codes, uniform
from .entropy import (
    decode_intra_block,
    decode_modes,
    decode_shift_groups,
    encode_intra_block,
    encode_modes,
    encode_shift_groups,
)
from .exceptions import (
    BitstreamError,
    ChecksumError,
    ContractViolation,
    MalformedStreamError,
)
from .rdopt import SPIKE_COUNT_BITS, shift_field_bits
from .transform import SCANS, VALID_EDGES

MAGIC = b"MFRM"
INTRA_MAGIC = b"MFIN"
VERSION = 1
MODES = ("optimized", "fixed")


class BlockMode(IntEnum):
    SKIP = 0
    INTRA = 1
    MERGE = 2


@dataclass(frozen=True)
class MFrameHeader:
    width: int
    height: int
    block_edge: int
    scan: str
    Q: float
    qp_m: int
    n_si: int
    mode: str
    lam: float

    @property
    def n_blocks(self):
        return (self.width // self.block_edge) * (self.height // self.block_edge)

    @property
    def K(self):
        return self.block_edge * self.block_edge


@dataclass(frozen=True)
class FrequencyParams:
    """Step size and shift model shared by the merge group at frequency k"""

    k: int
    W: int
    fixed: bool
    dist: ShiftDistribution

    @property
    def coding_dist(self) -> ShiftDistribution:
        if self.fixed or self.W == 1:
            return uniform(self.W)
        return self.dist


@dataclass(frozen=True, eq=False)
class MFramePayload:
    header: MFrameHeader
    modes: np.ndarray
    eobs: np.ndarray
    params: list[FrequencyParams] = field(default_factory=list)
    shifts: list[np.ndarray] = field(default_factory=list)
    intra: np.ndarray | None = None

    def members(self, k: int) -> np.ndarray:
        """MERGE blocks whose EOB reaches frequency k, raster order"""
        return np.flatnonzero((self.modes == BlockMode.MERGE) & (self.eobs >= k))


@dataclass(frozen=True)
class MFrameBitstream:
    """A serialized M-frame; parsing happens lazily and is cached"""

    data: bytes

    def __len__(self):
        return len(self.data)

    @property
    def rate_bits(self) -> int:
        return 8 * len(self.data)

    @cached_property
    def payload(self) -> MFramePayload:
        return read_mframe(self.data)

    @property
    def header(self) -> MFrameHeader:
        return self.payload.header


# ---------------------------------------------------------------------------
# Shared field helpers


def _write_float(writer: BitWriter, value: float):
    writer.write_bits(struct.unpack(">Q", struct.pack(">d", float(value)))[0], 64)


def _read_float(reader: BitReader) -> float:
    return struct.unpack(">d", struct.pack(">Q", reader.read_bits(64)))[0]


def _write_picture_fields(writer: BitWriter, magic: bytes, width, height, edge, scan, Q):
    writer.write_bits(int.from_bytes(magic, "big"), 32)
    writer.write_bits(VERSION, 8)
    writer.write_bits(width, 16)
    writer.write_bits(height, 16)
    writer.write_bits(VALID_EDGES.index(edge), 2)
    writer.write_bits(SCANS.index(scan), 1)
    _write_float(writer, Q)


def _read_picture_fields(reader: BitReader, magic: bytes):
    found = reader.read_bits(32).to_bytes(4, "big")
    if found != magic:
        raise MalformedStreamError(f"bad magic {found!r}, expected {magic!r}")
    version = reader.read_bits(8)
    if version != VERSION:
        raise MalformedStreamError(f"unsupported stream version {version}")
    width = reader.read_bits(16)
    height = reader.read_bits(16)
    edge_code = reader.read_bits(2)
    if edge_code >= len(VALID_EDGES):
        raise MalformedStreamError(f"bad block edge code {edge_code}")
    edge = VALID_EDGES[edge_code]
    scan = SCANS[reader.read_bits(1)]
    Q = _read_float(reader)
    if not width or not height or width % edge or height % edge:
        raise MalformedStreamError(f"bad frame size {width}x{height} for block edge {edge}")
    if not (math.isfinite(Q) and Q > 0):
        raise MalformedStreamError(f"bad quantizer step {Q}")
    return width, height, edge, scan, Q


def _seal(writer: BitWriter) -> bytes:
    writer.byte_align()
    body = writer.getvalue()
    return body + struct.pack(">I", zlib.crc32(body))


def _open(data: bytes) -> tuple[bytes, BitReader]:
    data = bytes(data)
    if len(data) < 8:
        raise MalformedStreamError(f"stream of {len(data)} bytes is too short")
    body, trailer = data[:-4], data[-4:]
    if struct.unpack(">I", trailer)[0] != zlib.crc32(body):
        raise ChecksumError("CRC-32 mismatch")
    return body, BitReader(body)


def _close(reader: BitReader):
    reader.byte_align()
    if reader.bits_left:
        raise MalformedStreamError(f"{reader.bits_left // 8} bytes of trailing data")


def _write_segment(writer: BitWriter, segment: BitWriter):
    writer.write_ue(len(segment))
    writer.append(segment)


def _segment(reader: BitReader, body: bytes) -> BitReader:
    """Zero-filled reader over the next length-prefixed segment, skipped in ``reader``"""
    length = reader.read_ue()
    segment = BitReader(body, reader.position, length, zero_fill=True)
    reader.skip(length)
    return segment


# ---------------------------------------------------------------------------
# M-frames


def write_mframe(payload: MFramePayload) -> bytes:
    header = payload.header
    if len(payload.params) != len(payload.shifts):
        raise ContractViolation("one shift array per coded frequency expected")
    writer = BitWriter()
    _write_picture_fields(
        writer, MAGIC, header.width, header.height, header.block_edge, header.scan, header.Q
    )
    writer.write_bits(header.qp_m, 8)
    writer.write_bits(header.n_si, 8)
    writer.write_bits(MODES.index(header.mode), 1)
    _write_float(writer, header.lam)

    _write_segment(writer, encode_modes(payload.modes))
    for b in np.flatnonzero(payload.modes == BlockMode.MERGE):
        writer.write_ue(int(payload.eobs[b]) + 1)

    for params in payload.params:
        if header.mode == "optimized":
            writer.write_bit(int(params.fixed))
        writer.write_ue(params.W - 1)
        if not params.fixed and params.W > 1:
            dist = params.dist
            writer.write_bits(dist.H - 1, SPIKE_COUNT_BITS)
            for location, code in zip(dist.locations, dist.probability_codes()):
                writer.write_bits(location, shift_field_bits(params.W))
                writer.write_bits(code, PROB_BITS)

    groups = [(shifts, p.coding_dist) for shifts, p in zip(payload.shifts, payload.params)]
    _write_segment(writer, encode_shift_groups(groups))

    if payload.intra is not None:
        for block in payload.intra:
            encode_intra_block(block, writer)
    return _seal(writer)


def _read_spikes(reader: BitReader, W: int) -> ShiftDistribution:
    H = reader.read_bits(SPIKE_COUNT_BITS) + 1
    if H > W:
        raise MalformedStreamError(f"{H} spikes over only {W} shifts")
    locations, codes = [], []
    for _ in range(H):
        locations.append(reader.read_bits(shift_field_bits(W)))
        codes.append(reader.read_bits(PROB_BITS))
    if min(codes) == 0:
        raise MalformedStreamError("zero spike probability")
    try:
        return from_codes(W, locations, codes)
    except (ContractViolation, IndexError) as exc:
        raise MalformedStreamError(f"bad spike list: {exc}") from exc


def read_mframe(data: bytes) -> MFramePayload:
    body, reader = _open(data)
    width, height, edge, scan, Q = _read_picture_fields(reader, MAGIC)
    qp_m = reader.read_bits(8)
    n_si = reader.read_bits(8)
    mode = MODES[reader.read_bits(1)]
    lam = _read_float(reader)
    if n_si < 1:
        raise MalformedStreamError("stream declares no SI frames")
    header = MFrameHeader(width, height, edge, scan, Q, qp_m, n_si, mode, lam)
    K = header.K

    modes = decode_modes(_segment(reader, body), header.n_blocks)
    eobs = np.full(header.n_blocks, -1, dtype=np.int64)
    for b in np.flatnonzero(modes == BlockMode.MERGE):
        eob = reader.read_ue() - 1
        if eob >= K:
            raise MalformedStreamError(f"EOB {eob} beyond block size {K}")
        eobs[b] = eob

    payload = MFramePayload(header, modes, eobs)
    params = []
    for k in range(int(eobs.max(initial=-1)) + 1):
        fixed = mode == "fixed" or bool(reader.read_bit())
        W = reader.read_ue() + 1
        if fixed and W % 2:
            raise MalformedStreamError(f"odd fixed-target step size {W} at k={k}")
        if fixed or W == 1:
            dist = uniform(W)
        else:
            dist = _read_spikes(reader, W)
        params.append(FrequencyParams(k, W, fixed, dist))

    groups = [(len(payload.members(p.k)), p.coding_dist) for p in params]
    try:
        shifts = decode_shift_groups(_segment(reader, body), groups)
    except ContractViolation as exc:
        raise MalformedStreamError(f"bad shift segment: {exc}") from exc

    n_intra = int(np.count_nonzero(modes == BlockMode.INTRA))
    intra = np.zeros((n_intra, K), dtype=np.int64)
    for i in range(n_intra):
        intra[i] = decode_intra_block(reader, K)
    _close(reader)
    return MFramePayload(header, modes, eobs, params, shifts, intra)


def parse(stream) -> MFrameBitstream:
    if isinstance(stream, MFrameBitstream):
        return stream
    if isinstance(stream, (bytes, bytearray, memoryview)):
        return MFrameBitstream(bytes(stream))
    raise BitstreamError(f"cannot read an M-frame from {type(stream).__name__}")


# ---------------------------------------------------------------------------
# Intra-only frames


def write_intra_frame(width, height, edge, scan, Q, qp, qcoeffs) -> bytes:
    writer = BitWriter()
    _write_picture_fields(writer, INTRA_MAGIC, width, height, edge, scan, Q)
    writer.write_bits(qp, 8)
    for block in qcoeffs:
        encode_intra_block(block, writer)
    return _seal(writer)


def read_intra_frame(data: bytes):
    """(width, height, edge, scan, Q, qp, qcoeffs) of an intra-only frame"""
    _, reader = _open(data)
    width, height, edge, scan, Q = _read_picture_fields(reader, INTRA_MAGIC)
    qp = reader.read_bits(8)
    n_blocks = (width // edge) * (height // edge)
    qcoeffs = np.stack([decode_intra_block(reader, edge * edge) for _ in range(n_blocks)])
    _close(reader)
    return width, height, edge, scan, Q, qp, qcoeffs
