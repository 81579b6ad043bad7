import math

import numpy as np
import pytest
from django.test import SimpleTestCase
from scipy.integrate import trapezoid

from codec.exceptions import CurveError, DimensionMismatchError
from codec.frames import Frame
from evaluation.metrics import RdCurve, RdPoint, bd_rate, format_psnr, mse, overlap, psnr


def curve(method, psnrs, slope, intercept):
    """Curve whose log-rate is exactly linear in PSNR"""
    psnrs = np.asarray(psnrs, dtype=float)
    return RdCurve.from_arrays(method, np.exp(slope * psnrs + intercept), psnrs)


class PsnrTests(SimpleTestCase):
    def test_identical_frames(self):
        frame = Frame(np.full((8, 8), 77))
        self.assertEqual(mse(frame, frame), 0.0)
        self.assertEqual(psnr(frame, frame), math.inf)
        self.assertEqual(format_psnr(math.inf), "inf")

    def test_off_by_one(self):
        a = Frame(np.full((8, 8), 100))
        b = Frame(np.full((8, 8), 101))
        self.assertAlmostEqual(psnr(a, b), 48.1308, places=4)
        self.assertEqual(format_psnr(psnr(a, b)), "48.13")

    def test_black_against_white(self):
        checker = (np.indices((8, 8)).sum(axis=0) % 2) * 255
        self.assertAlmostEqual(psnr(Frame(checker), Frame(255 - checker)), 0.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            mse(Frame(np.zeros((8, 8))), Frame(np.zeros((8, 16))))


class CurveTests(SimpleTestCase):
    def test_points_sorted_by_rate(self):
        c = RdCurve("m", (RdPoint(300, 35), RdPoint(100, 30), RdPoint(200, 33)))
        np.testing.assert_array_equal(c.rates, [100, 200, 300])
        np.testing.assert_array_equal(c.psnrs, [30, 33, 35])

    def test_rate_must_be_positive(self):
        with self.assertRaises(CurveError):
            RdPoint(0, 30)

    def test_overlap(self):
        a = curve("a", [30, 32, 34, 36], 0.1, 5)
        b = curve("b", [33, 35, 37, 39], 0.1, 5)
        self.assertEqual(overlap(a, b), (33.0, 36.0))


class BdRateTests(SimpleTestCase):
    def test_curve_against_itself(self):
        a = curve("a", [30, 33, 36, 39], 0.15, 4)
        self.assertAlmostEqual(bd_rate(a, a), 0.0, places=9)

    def test_double_rate(self):
        b = curve("b", [30, 33, 36, 39], 0.15, 4)
        a = curve("a", [30, 33, 36, 39], 0.15, 4 + math.log(2))
        self.assertAlmostEqual(bd_rate(a, b), 100.0, places=6)
        self.assertAlmostEqual(bd_rate(b, a), -50.0, places=6)

    def test_closed_form(self):
        """Exactly representable curves give the analytic mean log-ratio"""
        a = curve("a", [30, 33, 36, 40], 0.10, 5)
        b = curve("b", [28, 32, 36, 40], 0.12, 4)
        # mean of (1 - 0.02 p) over [30, 40]
        self.assertAlmostEqual(bd_rate(a, b), (math.exp(0.3) - 1) * 100, places=6)

    def test_numeric_integration_agrees(self):
        a = RdCurve.from_arrays("a", [900, 1500, 2600, 4100], [31.0, 34.2, 37.1, 39.8])
        b = RdCurve.from_arrays("b", [1000, 1800, 3000, 5200], [30.5, 33.9, 37.4, 40.6])
        low, high = overlap(a, b)
        grid = np.linspace(low, high, 2001)
        fit_a = np.polyfit(a.psnrs, np.log(a.rates), 3)
        fit_b = np.polyfit(b.psnrs, np.log(b.rates), 3)
        diff = trapezoid(np.polyval(fit_a, grid) - np.polyval(fit_b, grid), grid) / (high - low)
        self.assertAlmostEqual(bd_rate(a, b), (math.exp(diff) - 1) * 100, delta=0.5)
        self.assertLess(bd_rate(a, b), 0)

    def test_inverse_relation(self):
        a = RdCurve.from_arrays("a", [900, 1500, 2600, 4100], [31.0, 34.2, 37.1, 39.8])
        b = RdCurve.from_arrays("b", [1000, 1800, 3000, 5200], [30.5, 33.9, 37.4, 40.6])
        forward, backward = bd_rate(a, b), bd_rate(b, a)
        self.assertAlmostEqual((1 + forward / 100) * (1 + backward / 100), 1.0, places=9)

    def test_rejected_curves(self):
        good = curve("good", [30, 33, 36, 39], 0.15, 4)
        cases = {
            "too few points": curve("short", [30, 33, 36], 0.15, 4),
            "no overlap": curve("far", [50, 53, 56, 59], 0.15, 4),
            "infinite psnr": RdCurve.from_arrays("inf", [1, 2, 3, 4], [30, 33, 36, math.inf]),
            "repeated psnr": RdCurve.from_arrays("flat", [1, 2, 3, 4], [30, 30, 36, 39]),
        }
        for name, bad in cases.items():
            with self.subTest(name), self.assertRaises(CurveError):
                bd_rate(bad, good)


def test_constant_rate_ratio_survives_noise():
    rng = np.random.default_rng(0)
    for _ in range(20):
        psnrs = np.sort(rng.uniform(28, 42, size=5))
        rates = np.exp(0.2 * psnrs + rng.normal(0, 0.05, size=5))
        a = RdCurve.from_arrays("a", rates, psnrs)
        b = RdCurve.from_arrays("b", rates * 1.1, psnrs)
        assert bd_rate(a, b) == pytest.approx(100 / 1.1 - 100, abs=1e-6)
