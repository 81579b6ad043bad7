"""Quality and rate-comparison metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from codec.exceptions import CurveError
from codec.frames import Frame, check_same_dimensions

PEAK = 255.0
MIN_BD_POINTS = 4


def mse(a: Frame, b: Frame) -> float:
    check_same_dimensions(a, b)
    return float(np.mean(np.square(np.subtract(a.samples, b.samples, dtype=np.float64))))


def psnr(a: Frame, b: Frame) -> float:
    """Luma PSNR in dB; ``math.inf`` for identical frames"""
    error = mse(a, b)
    if error == 0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / error)


def format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"


@dataclass(frozen=True)
class RdPoint:
    rate_bits: float
    psnr_db: float
    label: str = ""

    def __post_init__(self):
        if not self.rate_bits > 0:
            raise CurveError(f"RD point rate must be positive, got {self.rate_bits}")


@dataclass(frozen=True)
class RdCurve:
    """RD points of one method, kept sorted by rate"""

    method: str
    points: tuple[RdPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.rate_bits)))

    @classmethod
    def from_arrays(cls, method: str, rates, psnrs) -> "RdCurve":
        return cls(method, tuple(RdPoint(float(r), float(p)) for r, p in zip(rates, psnrs)))

    def __len__(self):
        return len(self.points)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate_bits for p in self.points])

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr_db for p in self.points])


def _check_curve(curve: RdCurve):
    if len(curve) < MIN_BD_POINTS:
        raise CurveError(f"{curve.method}: BD-rate needs {MIN_BD_POINTS} points, got {len(curve)}")
    if not np.isfinite(curve.psnrs).all():
        raise CurveError(f"{curve.method}: BD-rate needs finite PSNR values")
    if len(np.unique(curve.psnrs)) < MIN_BD_POINTS:
        raise CurveError(f"{curve.method}: PSNR values must be distinct")


def overlap(curve_a: RdCurve, curve_b: RdCurve) -> tuple[float, float]:
    low = max(curve_a.psnrs.min(), curve_b.psnrs.min())
    high = min(curve_a.psnrs.max(), curve_b.psnrs.max())
    if not high > low:
        raise CurveError(
            f"PSNR ranges of {curve_a.method} and {curve_b.method} do not overlap"
        )
    return float(low), float(high)


def bd_rate(curve_a: RdCurve, curve_b: RdCurve) -> float:
    """Bjontegaard rate difference of ``curve_a`` against ``curve_b`` in percent.

    Log-rate is fitted as a cubic in PSNR for each curve and the fits are
    integrated over the common PSNR range. Negative means ``curve_a`` needs
    fewer bits for the same quality.
    """
    _check_curve(curve_a)
    _check_curve(curve_b)
    low, high = overlap(curve_a, curve_b)
    fit_a = np.polyint(np.polyfit(curve_a.psnrs, np.log(curve_a.rates), 3))
    fit_b = np.polyint(np.polyfit(curve_b.psnrs, np.log(curve_b.rates), 3))
    area_a = np.polyval(fit_a, high) - np.polyval(fit_a, low)
    area_b = np.polyval(fit_b, high) - np.polyval(fit_b, low)
    mean_log_ratio = (area_a - area_b) / (high - low)
    return float((math.exp(mean_log_ratio) - 1) * 100)
