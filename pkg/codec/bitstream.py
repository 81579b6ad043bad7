"""Bit-level writer and reader with Exp-Golomb codes.

Multi-bit fields are written most significant bit first.
"""

from __future__ import annotations

from .exceptions import ContractViolation, MalformedStreamError


class BitWriter:
    def __init__(self):
        self._bytes = bytearray()
        self._current = 0
        self._filled = 0
        self.bit_count = 0

    def write_bit(self, bit: int):
        self._current = (self._current << 1) | (bit & 1)
        self._filled += 1
        self.bit_count += 1
        if self._filled == 8:
            self._bytes.append(self._current)
            self._current = 0
            self._filled = 0

    def write_bits(self, value: int, n: int):
        """Write ``value`` as an n-bit unsigned field"""
        if n < 0 or value < 0 or value >> n:
            raise ContractViolation(f"{value} does not fit in {n} bits")
        for shift in range(n - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def write_ue(self, value: int):
        """Unsigned Exp-Golomb code ue(v)"""
        if value < 0:
            raise ContractViolation(f"ue(v) needs a non-negative value, got {value}")
        code = value + 1
        length = code.bit_length()
        self.write_bits(0, length - 1)
        self.write_bits(code, length)

    def write_se(self, value: int):
        """Signed Exp-Golomb code se(v): 1 -> 1, -1 -> 2, 2 -> 3, ..."""
        self.write_ue(signed_to_ue(value))

    def write_bitstring(self, bits):
        for bit in bits:
            self.write_bit(bit)

    def byte_align(self):
        while self._filled:
            self.write_bit(0)

    def __len__(self):
        return self.bit_count

    def bits(self):
        """Iterate over the written bits in order"""
        data = self.getvalue()
        return ((data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(self.bit_count))

    def append(self, other: "BitWriter"):
        self.write_bitstring(other.bits())

    def getvalue(self) -> bytes:
        """Bytes written so far, the last one zero-padded"""
        if self._filled:
            return bytes(self._bytes) + bytes([self._current << (8 - self._filled)])
        return bytes(self._bytes)


class BitReader:
    """Reads bits from a byte string, optionally limited to ``bit_limit`` bits.

    Reading past the end raises :class:`MalformedStreamError`, except in
    ``zero_fill`` mode, where the arithmetic decoder's lookahead gets zeros.
    """

    def __init__(self, data: bytes, bit_offset: int = 0, bit_limit: int | None = None,
                 zero_fill: bool = False):
        self.data = data
        self.position = bit_offset
        self.end = len(data) * 8 if bit_limit is None else bit_offset + bit_limit
        if self.end > len(data) * 8:
            raise MalformedStreamError("segment runs past the end of the stream")
        self.zero_fill = zero_fill

    def read_bit(self) -> int:
        if self.position >= self.end:
            if self.zero_fill:
                return 0
            raise MalformedStreamError("unexpected end of stream")
        byte = self.data[self.position >> 3]
        bit = (byte >> (7 - (self.position & 7))) & 1
        self.position += 1
        return bit

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def read_ue(self) -> int:
        leading_zeros = 0
        while self.read_bit() == 0:
            leading_zeros += 1
            if leading_zeros > 48:
                raise MalformedStreamError("Exp-Golomb prefix too long")
        return (1 << leading_zeros) - 1 + self.read_bits(leading_zeros)

    def read_se(self) -> int:
        return ue_to_signed(self.read_ue())

    def skip(self, n: int):
        if self.position + n > self.end:
            raise MalformedStreamError("segment runs past the end of the stream")
        self.position += n

    def byte_align(self):
        self.position = (self.position + 7) // 8 * 8

    @property
    def bits_left(self) -> int:
        return self.end - self.position


def signed_to_ue(value: int) -> int:
    return 2 * value - 1 if value > 0 else -2 * value


def ue_to_signed(code: int) -> int:
    return (code + 1) // 2 if code % 2 else -(code // 2)


def ue_length(value: int) -> int:
    return 2 * (value + 1).bit_length() - 1


def se_length(value: int) -> int:
    return ue_length(signed_to_ue(value))
