"""Arithmetic coding of shifts and Exp-Golomb coding of intra blocks.

The arithmetic coder is the classic 32-bit integer coder with E3 underflow
handling. ``finish`` writes a single 1 bit and the decoder reads zeros past
the end of its segment, so segments can be embedded in a larger stream as
long as their bit length is known.
"""

from __future__ import annotations

import numpy as np

from .bitstream import BitReader, BitWriter
from .distribution import ShiftDistribution
from .exceptions import ContractViolation, MalformedStreamError

STATE_BITS = 32
MODE_SYMBOLS = 3


class FrequencyTable:
    """Static integer frequencies with cumulative lookup"""

    def __init__(self, freqs):
        self.freqs = [int(f) for f in freqs]
        if not self.freqs or min(self.freqs) < 1:
            raise ContractViolation("every symbol needs a positive frequency")
        self._rebuild()

    def _rebuild(self):
        self.cumulative = np.concatenate([[0], np.cumsum(self.freqs)]).tolist()

    def __len__(self):
        return len(self.freqs)

    @property
    def total(self):
        return self.cumulative[-1]

    def low(self, symbol):
        return self.cumulative[symbol]

    def high(self, symbol):
        return self.cumulative[symbol + 1]

    def symbol_for(self, value) -> int:
        start, end = 0, len(self.freqs)
        while end - start > 1:
            middle = (start + end) >> 1
            if self.cumulative[middle] > value:
                end = middle
            else:
                start = middle
        return start

    def update(self, symbol):
        pass


class AdaptiveFrequencyTable(FrequencyTable):
    """Counts every coded symbol; both sides update in lockstep"""

    def __init__(self, size: int):
        super().__init__([1] * size)

    def update(self, symbol):
        self.freqs[symbol] += 1
        for i in range(symbol + 1, len(self.cumulative)):
            self.cumulative[i] += 1


class _CoderBase:
    MAX_RANGE = 1 << STATE_BITS
    MIN_RANGE = (MAX_RANGE >> 2) + 2
    MAX_TOTAL = MIN_RANGE
    MASK = MAX_RANGE - 1
    TOP_MASK = MAX_RANGE >> 1
    SECOND_MASK = TOP_MASK >> 1

    def __init__(self):
        self.low = 0
        self.high = self.MASK

    def _update(self, table: FrequencyTable, symbol: int):
        total = table.total
        if total > self.MAX_TOTAL:
            raise ContractViolation(f"frequency total {total} exceeds {self.MAX_TOTAL}")
        span = self.high - self.low + 1
        sym_low, sym_high = table.low(symbol), table.high(symbol)
        if sym_low == sym_high:
            raise ContractViolation(f"symbol {symbol} has zero frequency")
        self.high = self.low + sym_high * span // total - 1
        self.low = self.low + sym_low * span // total
        while ((self.low ^ self.high) & self.TOP_MASK) == 0:
            self._shift()
            self.low = (self.low << 1) & self.MASK
            self.high = ((self.high << 1) & self.MASK) | 1
        while self.low & ~self.high & self.SECOND_MASK:
            self._underflow()
            self.low = (self.low << 1) & (self.MASK >> 1)
            self.high = ((self.high << 1) & (self.MASK >> 1)) | self.TOP_MASK | 1

    def _shift(self):
        raise NotImplementedError

    def _underflow(self):
        raise NotImplementedError


class ArithmeticEncoder(_CoderBase):
    def __init__(self, writer: BitWriter):
        super().__init__()
        self.writer = writer
        self.pending = 0

    def write(self, table: FrequencyTable, symbol: int):
        if not 0 <= symbol < len(table):
            raise ContractViolation(f"symbol {symbol} outside [0, {len(table)})")
        self._update(table, symbol)
        table.update(symbol)

    def finish(self):
        self.writer.write_bit(1)

    def _shift(self):
        bit = self.low >> (STATE_BITS - 1)
        self.writer.write_bit(bit)
        for _ in range(self.pending):
            self.writer.write_bit(bit ^ 1)
        self.pending = 0

    def _underflow(self):
        self.pending += 1


class ArithmeticDecoder(_CoderBase):
    def __init__(self, reader: BitReader):
        super().__init__()
        self.reader = reader
        self.code = reader.read_bits(STATE_BITS)

    def read(self, table: FrequencyTable) -> int:
        span = self.high - self.low + 1
        value = ((self.code - self.low + 1) * table.total - 1) // span
        if not 0 <= value < table.total:
            raise MalformedStreamError("arithmetic code value out of range")
        symbol = table.symbol_for(value)
        self._update(table, symbol)
        table.update(symbol)
        return symbol

    def _shift(self):
        self.code = ((self.code << 1) & self.MASK) | self.reader.read_bit()

    def _underflow(self):
        self.code = (
            (self.code & self.TOP_MASK)
            | ((self.code << 1) & (self.MASK >> 1))
            | self.reader.read_bit()
        )


def segment_reader(bits, bit_count: int | None = None) -> BitReader:
    """Zero-filled reader over an encoded segment"""
    if isinstance(bits, BitReader):
        return bits
    if isinstance(bits, BitWriter):
        return BitReader(bits.getvalue(), bit_limit=len(bits), zero_fill=True)
    return BitReader(bytes(bits), bit_limit=bit_count, zero_fill=True)


# ---------------------------------------------------------------------------
# Shifts


def shift_table(dist: ShiftDistribution) -> FrequencyTable:
    return FrequencyTable(dist.frequencies())


def encode_shift_groups(groups) -> BitWriter:
    """Arithmetic-code several (shifts, distribution) groups into one segment.

    Groups over a single shift (W = 1) cost nothing. An empty segment has no
    bits at all.
    """
    writer = BitWriter()
    encoder = ArithmeticEncoder(writer)
    coded = 0
    for shifts, dist in groups:
        if dist.W == 1:
            if any(int(c) != 0 for c in shifts):
                raise ContractViolation("only shift 0 exists when W = 1")
            continue
        table = shift_table(dist)
        for c in shifts:
            c = int(c)
            if not 0 <= c < dist.W:
                raise ContractViolation(f"shift {c} outside [0, {dist.W})")
            encoder.write(table, c)
            coded += 1
    if coded:
        encoder.finish()
    return writer


def decode_shift_groups(bits, groups, bit_count: int | None = None) -> list[np.ndarray]:
    """Inverse of :func:`encode_shift_groups`; ``groups`` holds (count, distribution)"""
    reader = segment_reader(bits, bit_count)
    decoder = None
    decoded = []
    for count, dist in groups:
        if dist.W == 1 or count == 0:
            decoded.append(np.zeros(count, dtype=np.int64))
            continue
        if decoder is None:
            decoder = ArithmeticDecoder(reader)
        table = shift_table(dist)
        decoded.append(np.array([decoder.read(table) for _ in range(count)], dtype=np.int64))
    return decoded


def entropy_encode_shifts(shifts, dist: ShiftDistribution) -> BitWriter:
    return encode_shift_groups([(shifts, dist)])


def entropy_decode_shifts(bits, dist: ShiftDistribution, count: int) -> np.ndarray:
    return decode_shift_groups(bits, [(count, dist)])[0]


def ideal_shift_bits(shifts, dist: ShiftDistribution) -> float:
    """Sum of -log2 P(c) under the coding model"""
    if dist.W == 1:
        return 0.0
    freqs = dist.frequencies()
    p = freqs[np.asarray(shifts, dtype=np.int64)] / freqs.sum()
    return float(-np.log2(p).sum())


# ---------------------------------------------------------------------------
# Mode map


def encode_modes(modes) -> BitWriter:
    writer = BitWriter()
    if len(modes):
        encoder = ArithmeticEncoder(writer)
        table = AdaptiveFrequencyTable(MODE_SYMBOLS)
        for mode in modes:
            encoder.write(table, int(mode))
        encoder.finish()
    return writer


def decode_modes(bits, count: int, bit_count: int | None = None) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    decoder = ArithmeticDecoder(segment_reader(bits, bit_count))
    table = AdaptiveFrequencyTable(MODE_SYMBOLS)
    return np.array([decoder.read(table) for _ in range(count)], dtype=np.int64)


# ---------------------------------------------------------------------------
# Intra blocks


def last_nonzero(qcoeffs) -> int:
    """Index of the last nonzero coefficient, -1 for an all-zero block"""
    nonzero = np.flatnonzero(np.asarray(qcoeffs))
    return int(nonzero[-1]) if len(nonzero) else -1


def encode_intra_block(qcoeffs, writer: BitWriter | None = None) -> BitWriter:
    """ue(E + 1) followed by se(v) for every coefficient up to the EOB"""
    writer = BitWriter() if writer is None else writer
    eob = last_nonzero(qcoeffs)
    writer.write_ue(eob + 1)
    for value in np.asarray(qcoeffs)[: eob + 1]:
        writer.write_se(int(value))
    return writer


def decode_intra_block(reader, K: int) -> np.ndarray:
    if isinstance(reader, BitWriter):
        reader = BitReader(reader.getvalue(), bit_limit=len(reader))
    count = reader.read_ue()
    if count > K:
        raise MalformedStreamError(f"intra EOB {count - 1} beyond block size {K}")
    block = np.zeros(K, dtype=np.int64)
    for k in range(count):
        block[k] = reader.read_se()
    return block


def ue_lengths(values: np.ndarray) -> np.ndarray:
    _, exponent = np.frexp((values + 1).astype(np.float64))
    return 2 * exponent - 1


def intra_block_bits(qcoeffs: np.ndarray) -> np.ndarray:
    """Exact intra code length of every row of an (n_blocks, K) array"""
    qcoeffs = np.atleast_2d(np.asarray(qcoeffs, dtype=np.int64))
    K = qcoeffs.shape[1]
    nonzero = qcoeffs != 0
    eob = np.where(nonzero.any(axis=1), K - 1 - np.argmax(nonzero[:, ::-1], axis=1), -1)
    codes = np.where(qcoeffs > 0, 2 * qcoeffs - 1, -2 * qcoeffs)
    lengths = ue_lengths(codes)
    coded = np.arange(K)[np.newaxis, :] <= eob[:, np.newaxis]
    return ue_lengths(eob + 1) + np.where(coded, lengths, 0).sum(axis=1)
