import struct
import zlib

import numpy as np
from django.test import SimpleTestCase

from codec.config import CodecConfig
from codec.exceptions import BitstreamError, ChecksumError, MalformedStreamError
from codec.frame_codec import encode_mframe
from codec.syntax import (
    MAGIC,
    BlockMode,
    parse,
    read_intra_frame,
    read_mframe,
    write_intra_frame,
    write_mframe,
)
from harness.sigen import SiGenConfig, generate_si_set
from harness.sources import synthetic_frame


def reseal(body: bytes) -> bytes:
    return body + struct.pack(">I", zlib.crc32(body))


class MFrameSyntaxTests(SimpleTestCase):
    """Tests for M-frame serialization"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        target = synthetic_frame(32, 32, seed=12)
        si = generate_si_set(target, SiGenConfig(seed=12, n_si=3))
        cls.result = encode_mframe(si, target, CodecConfig(max_spikes=8))
        cls.data = cls.result.bitstream.data

    def test_header_fields(self):
        header = read_mframe(self.data).header
        self.assertEqual((header.width, header.height), (32, 32))
        self.assertEqual(header.block_edge, 16)
        self.assertEqual(header.n_si, 3)
        self.assertEqual(header.mode, self.result.mode)
        self.assertEqual(header.lam, self.result.lam)

    def test_block_data_round_trip(self):
        """Modes, EOBs and shifts read back as written"""
        payload = read_mframe(self.data)
        np.testing.assert_array_equal(payload.modes, self.result.block_modes)
        np.testing.assert_array_equal(payload.eobs, self.result.eobs)
        self.assertEqual(write_mframe(payload), self.data)

    def test_merge_groups(self):
        """One parameter set per frequency up to the largest MERGE EOB"""
        payload = read_mframe(self.data)
        merge = payload.modes == BlockMode.MERGE
        self.assertEqual(len(payload.params), int(payload.eobs[merge].max(initial=-1)) + 1)
        for params, shifts in zip(payload.params, payload.shifts):
            self.assertEqual(len(shifts), len(payload.members(params.k)))
            self.assertTrue(((shifts >= 0) & (shifts < params.W)).all())

    def test_starts_with_magic(self):
        self.assertEqual(self.data[:4], MAGIC)

    def test_corrupted_byte(self):
        """Any flipped byte fails the checksum"""
        data = bytearray(self.data)
        data[len(data) // 2] ^= 0x10
        with self.assertRaises(ChecksumError):
            read_mframe(bytes(data))

    def test_truncated(self):
        with self.assertRaises(MalformedStreamError):
            read_mframe(self.data[:5])

    def test_bad_magic(self):
        """A valid checksum does not rescue a foreign stream"""
        with self.assertRaises(MalformedStreamError):
            read_mframe(reseal(b"XXXX" + self.data[4:-4]))

    def test_trailing_data(self):
        with self.assertRaises(MalformedStreamError):
            read_mframe(reseal(self.data[:-4] + b"\x00"))

    def test_parse_rejects_other_types(self):
        with self.assertRaises(BitstreamError):
            parse(12)

    def test_parse_is_lazy_and_cached(self):
        stream = parse(self.data)
        self.assertIs(stream.payload, stream.payload)
        self.assertEqual(stream.rate_bits, 8 * len(self.data))


class IntraSyntaxTests(SimpleTestCase):
    """Tests for intra-only frame serialization"""

    def test_round_trip(self):
        qcoeffs = np.zeros((4, 64), dtype=np.int64)
        qcoeffs[:, 0] = [50, -3, 0, 7]
        qcoeffs[1, 10] = 2
        data = write_intra_frame(16, 16, 8, "raster", 2.5, 17, qcoeffs)
        width, height, edge, scan, Q, qp, decoded = read_intra_frame(data)
        self.assertEqual((width, height, edge, scan, Q, qp), (16, 16, 8, "raster", 2.5, 17))
        np.testing.assert_array_equal(decoded, qcoeffs)

    def test_not_an_mframe(self):
        """Intra frames and M-frames are told apart"""
        data = write_intra_frame(16, 16, 8, "zigzag", 1.0, 4, np.zeros((4, 64), dtype=np.int64))
        with self.assertRaises(MalformedStreamError):
            read_mframe(data)
