import numpy as np
import pytest
from django.test import SimpleTestCase

from codec.config import CodecConfig
from codec.exceptions import ConfigurationError, DimensionMismatchError, StructuralError
from codec.entropy import intra_block_bits, ue_lengths
from codec.frame_codec import (
    MAX_SI,
    decode_coefficients,
    decode_intra_frame,
    decode_mframe,
    encode_intra_frame,
    encode_mframe,
    mode_decide,
    place_eob,
    place_eobs,
)
from codec.frames import Frame
from codec.pwc import fixed_target_step
from codec.syntax import BlockMode
from codec.transform import frame_coefficients, frame_qcoeffs, qstep
from harness.sigen import SiGenConfig, generate_si_set
from harness.sources import synthetic_frame


def si_set(seed, n_si=3, size=32, divergence="quantized-noise"):
    target = synthetic_frame(size, size, seed)
    sigen = SiGenConfig(seed=seed, n_si=n_si, divergence_model=divergence)
    return target, generate_si_set(target, sigen)


def assert_drift_free(result, si_frames):
    decoded = [decode_mframe(result.bitstream, si) for si in si_frames]
    for frame in decoded[1:]:
        assert frame == decoded[0]
    return decoded[0]


def fixed_merge_bits(si_qcoeffs, x0):
    """EOB plus one log2(W) shift per coded frequency, W from the SI spread"""
    z_target = np.abs(np.asarray(si_qcoeffs) - x0).max(axis=0)
    eob = int(np.flatnonzero(x0).max())
    steps = [fixed_target_step(z) for z in z_target[: eob + 1]]
    return float(ue_lengths(np.array([eob + 1]))[0] + np.log2(steps).sum())


def noise_si_set(size=32, edge=16):
    """Flat target with one small top-frequency ripple, and two uniform-noise SI frames"""
    x = np.arange(edge)
    ripple = np.sqrt(2 / edge) * np.cos(np.pi * (2 * x + 1) * (edge - 1) / (2 * edge))
    block = 128 + 30 * np.outer(ripple, ripple)
    target = Frame(np.rint(np.tile(block, (size // edge, size // edge))).astype(np.uint8))
    rng = np.random.default_rng(77)
    si = [Frame(rng.integers(0, 256, size=(size, size), dtype=np.uint8)) for _ in range(2)]
    return target, si


class BlockDecisionTests(SimpleTestCase):
    """Tests for mode and EOB decisions"""

    def test_identical_si_is_skip(self):
        """Agreeing SI q-coeffs need no data"""
        self.assertEqual(mode_decide([[1, 2], [1, 2]], 5.0, 1.0), BlockMode.SKIP)

    def test_cheaper_mode_wins(self):
        """Otherwise the lower cost decides, ties to MERGE"""
        si = [[1, 2], [1, 3]]
        self.assertEqual(mode_decide(si, 5.0, 1.0), BlockMode.INTRA)
        self.assertEqual(mode_decide(si, 1.0, 5.0), BlockMode.MERGE)
        self.assertEqual(mode_decide(si, 2.0, 2.0), BlockMode.MERGE)

    def test_wildly_different_si_is_intra(self):
        """Large SI spreads make every merge shift dearer than coding the target"""
        x0 = np.zeros(16, dtype=np.int64)
        x0[:3] = [3, -1, 1]
        wild = np.stack([x0, x0 + 40])
        self.assertEqual(
            mode_decide(wild, fixed_merge_bits(wild, x0), intra_block_bits(x0)[0]),
            BlockMode.INTRA,
        )

    def test_one_coefficient_off_by_one_is_merge(self):
        """SI that nearly agree merge for fewer bits than intra"""
        x0 = np.zeros(16, dtype=np.int64)
        x0[:3] = [3, -1, 1]
        near = np.stack([x0, x0])
        near[1, 0] += 1
        self.assertEqual(
            mode_decide(near, fixed_merge_bits(near, x0), intra_block_bits(x0)[0]),
            BlockMode.MERGE,
        )

    def test_fixed_eob_is_last_nonzero(self):
        """Fixed mode never truncates a nonzero target q-coeff"""
        self.assertEqual(place_eob([4, 0, -1, 0, 0]), 2)
        self.assertEqual(place_eob([0, 0, 0]), -1)

    def test_nothing_worth_coding(self):
        """Zero energy and free coding still pick the shortest EOB"""
        eobs, _ = place_eobs(np.zeros((1, 8)), np.zeros((1, 8)), 1.0)
        self.assertEqual(eobs[0], -1)

    def test_strong_dc_is_coded(self):
        """A large first coefficient is worth one EOB"""
        y0 = np.zeros(8)
        y0[0] = 100.0
        self.assertEqual(place_eob(None, "optimized", y0=y0, coded_cost=np.zeros(8), lam=1.0), 0)

    def test_uncodable_frequency(self):
        """Infinite coding cost stops the EOB before it"""
        coded = np.zeros((1, 4))
        coded[0, 2] = np.inf
        y0 = np.array([[10.0, 10.0, 10.0, 10.0]])
        eobs, cost = place_eobs(coded, y0, 0.01)
        self.assertEqual(eobs[0], 1)
        self.assertAlmostEqual(cost[0], 200.0 + 0.01 * 3)

    def test_optimized_eob_needs_costs(self):
        with self.assertRaises(ConfigurationError):
            place_eob([1, 2], "optimized")


class EncodeTests(SimpleTestCase):
    """Tests for M-frame encoding and decoding"""

    def setUp(self):
        self.target, self.si = si_set(seed=21)
        self.config = CodecConfig(qp_si=27, max_spikes=8)

    def test_optimized_is_drift_free(self):
        """Every SI frame decodes to the encoder's reconstruction"""
        result = encode_mframe(self.si, self.target, self.config)
        decoded = assert_drift_free(result, self.si)
        self.assertEqual(decoded, result.reconstruction)
        self.assertEqual(result.requested_mode, "optimized")

    def test_fixed_is_drift_free(self):
        result = encode_mframe(self.si, self.target, self.config.replace(mode="fixed"))
        assert_drift_free(result, self.si)
        self.assertEqual(result.mode, "fixed")

    def test_fixed_reconstructs_target_qcoeffs(self):
        """Fixed mode decodes to the target quantized at the SI step"""
        result = encode_mframe(self.si, self.target, self.config.replace(mode="fixed"))
        Q = qstep(27)
        expected = frame_qcoeffs(self.target, 16, Q) * Q
        for si in self.si:
            np.testing.assert_array_equal(decode_coefficients(result.bitstream, si), expected)

    def test_naive_model_is_drift_free(self):
        config = self.config.replace(distribution="naive")
        assert_drift_free(encode_mframe(self.si, self.target, config), self.si)

    def test_identical_si_gives_all_skip(self):
        """SI frames equal to the target need no merging at all"""
        for mode in ("optimized", "fixed"):
            result = encode_mframe([self.target] * 3, self.target, self.config.replace(mode=mode))
            self.assertEqual(result.mode_counts()["skip"], 4)

    def test_mode_counts_cover_frame(self):
        result = encode_mframe(self.si, self.target, self.config)
        self.assertEqual(sum(result.mode_counts().values()), 4)

    def test_distortion_matches_decode(self):
        """Reported D is the coefficient error of the decoded frame"""
        result = encode_mframe(self.si, self.target, self.config)
        coeffs = decode_coefficients(result.bitstream, self.si[0])
        y0 = frame_coefficients(self.target, 16)
        self.assertAlmostEqual(result.distortion, float(((y0 - coeffs) ** 2).sum()), places=6)

    def test_optimized_never_loses_to_fixed(self):
        """The realized Lagrangian is at most the fixed-mode one"""
        for lam in (1.0, 16.0, 256.0):
            config = self.config.replace(lam=lam)
            optimized = encode_mframe(self.si, self.target, config)
            fixed = encode_mframe(self.si, self.target, config.replace(mode="fixed"))
            self.assertLessEqual(optimized.lagrangian, fixed.lagrangian)

    def test_stream_is_deterministic(self):
        """The same inputs give byte-identical streams"""
        for mode in ("optimized", "fixed"):
            config = self.config.replace(mode=mode)
            first = encode_mframe(self.si, self.target, config).bitstream.data
            second = encode_mframe(list(self.si), self.target, config).bitstream.data
            self.assertEqual(first, second)

    def test_stream_header_bytes(self):
        """Magic, version and picture size open every M-frame"""
        data = encode_mframe(self.si, self.target, self.config).bitstream.data
        self.assertEqual(data[:9], b"MFRM\x01\x00\x20\x00\x20")

    def test_noise_si_codes_intra(self):
        """Pure-noise SI against a nearly flat target leaves nothing worth merging"""
        target, si = noise_si_set()
        result = encode_mframe(si, target, self.config.replace(mode="fixed"))
        self.assertEqual(result.mode_counts()["intra"], 4)
        assert_drift_free(result, si)

    def test_needs_si(self):
        with self.assertRaises(StructuralError):
            encode_mframe([], self.target, self.config)

    def test_too_many_si(self):
        with self.assertRaises(ConfigurationError):
            encode_mframe([self.target] * (MAX_SI + 1), self.target, self.config)

    def test_size_mismatch(self):
        """Encoder and decoder reject frames of another size"""
        other = synthetic_frame(48, 32, seed=1)
        with self.assertRaises(DimensionMismatchError):
            encode_mframe([other], self.target, self.config)
        result = encode_mframe(self.si, self.target, self.config.replace(mode="fixed"))
        with self.assertRaises(DimensionMismatchError):
            decode_mframe(result.bitstream, other)


class IntraFrameTests(SimpleTestCase):
    """Tests for the intra-refresh baseline"""

    def test_round_trip(self):
        frame = synthetic_frame(32, 32, seed=2)
        coded = encode_intra_frame(frame, 27)
        self.assertEqual(decode_intra_frame(coded.data), coded.reconstruction)
        self.assertEqual(coded.rate_bits, 8 * len(coded.data))

    def test_finer_qp_costs_more(self):
        frame = synthetic_frame(32, 32, seed=2)
        fine, coarse = encode_intra_frame(frame, 22), encode_intra_frame(frame, 37)
        self.assertGreater(fine.rate_bits, coarse.rate_bits)


def _drift_trials(seeds, size):
    for seed in seeds:
        n_si = 2 + seed % 3
        divergence = ("quantized-noise", "shifted-content", "mixed")[seed % 3]
        target, si = si_set(seed, n_si, size, divergence)
        for mode in ("optimized", "fixed"):
            result = encode_mframe(si, target, CodecConfig(mode=mode, max_spikes=8))
            assert_drift_free(result, si)
            if mode == "fixed":
                Q = result.bitstream.header.Q
                expected = frame_qcoeffs(target, 16, Q) * Q
                decoded = decode_coefficients(result.bitstream, si[0])
                np.testing.assert_array_equal(decoded, expected)


def test_drift_free_sample():
    """Seeded SI sets of 2 to 4 frames decode identically in both modes"""
    _drift_trials(range(6), 32)


@pytest.mark.slow
def test_drift_free_full():
    """1000 seeded 64x64 SI sets"""
    _drift_trials(range(1000), 64)


@pytest.mark.slow
def test_optimized_dominates_fixed_on_corpus():
    for seed in range(8):
        target, si = si_set(seed, size=64)
        for lam in (1.0, 4.0, 16.0, 64.0, 256.0):
            config = CodecConfig(lam=lam)
            optimized = encode_mframe(si, target, config)
            fixed = encode_mframe(si, target, config.replace(mode="fixed"))
            assert optimized.lagrangian <= fixed.lagrangian
