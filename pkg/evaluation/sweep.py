"""RD sweeps over a seeded corpus.

A sweep codes every corpus frame once per setting (a lambda or a QP) and
reduces the results to one RD point: mean bits per frame and the PSNR of the
mean squared error. Each M-frame is decoded with every one of its SI frames
so drift shows up in the same pass.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from codec.config import CodecConfig
from codec.exceptions import ConfigurationError, CurveError
from codec.frame_codec import decode_mframe, encode_intra_frame, encode_mframe
from codec.frames import Frame
from codec.rdopt import lambda_from_qp
from harness.sigen import SiGenConfig, generate_si_set
from harness.sources import synthetic_frame

from .metrics import PEAK, RdCurve, RdPoint, mse

logger = logging.getLogger(__name__)

METHODS = ("optimized", "fixed", "naive", "intra")
AXES = ("lambda", "qp")
CSV_FIELDS = ("method", "qp", "lambda", "rate_bits", "psnr_db", "drift")
DEFAULT_LAMBDAS = tuple(2.0**e for e in range(9))
DEFAULT_QPS = (22, 27, 32, 37)


@dataclass(frozen=True, eq=False)
class CorpusItem:
    target: Frame
    si_frames: tuple[Frame, ...]


def synthetic_corpus(n_frames: int, size: int | None = None, sigen: SiGenConfig | None = None):
    """``n_frames`` seeded targets, each with its generated SI set"""
    size = settings.MFRAME["FRAME_SIZE"] if size is None else size
    sigen = SiGenConfig.from_settings() if sigen is None else sigen
    corpus = []
    for i in range(n_frames):
        target = synthetic_frame(size, size, [sigen.seed, i])
        corpus.append(CorpusItem(target, tuple(generate_si_set(target, sigen))))
    return corpus


@dataclass(frozen=True)
class SweepResult:
    method: str
    qp: int
    lam: float
    rate_bits: float
    psnr_db: float
    distortion: float
    drift: bool

    @property
    def point(self) -> RdPoint:
        return RdPoint(self.rate_bits, self.psnr_db, label=f"{self.method}@{self.lam:g}")

    def row(self) -> dict:
        return {
            "method": self.method,
            "qp": self.qp,
            "lambda": f"{self.lam:g}",
            "rate_bits": f"{self.rate_bits:.2f}",
            "psnr_db": "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.4f}",
            "drift": int(self.drift),
        }


def _config_for(method: str, base: CodecConfig, qp: int, lam: float) -> CodecConfig:
    if method == "intra":
        return base.replace(qp_si=qp, lam=lam)
    if method == "naive":
        return base.replace(mode="optimized", distribution="naive", qp_si=qp, lam=lam)
    return base.replace(mode=method, qp_si=qp, lam=lam)


def _code_item(method: str, config: CodecConfig, item: CorpusItem):
    """(bits, squared error, drift) of one corpus frame"""
    if method == "intra":
        coded = encode_intra_frame(item.target, config.qp_si, config.block_edge, config.scan)
        return coded.rate_bits, mse(coded.reconstruction, item.target), False
    result = encode_mframe(item.si_frames, item.target, config)
    decoded = [decode_mframe(result.bitstream, si) for si in item.si_frames]
    drift = any(frame != decoded[0] for frame in decoded[1:])
    return result.rate_bits, mse(decoded[0], item.target), drift


def run_point(method: str, corpus, qp: int, lam: float, base: CodecConfig) -> SweepResult:
    config = _config_for(method, base, qp, lam)
    coded = [_code_item(method, config, item) for item in corpus]
    bits = float(np.mean([c[0] for c in coded]))
    error = float(np.mean([c[1] for c in coded]))
    value = math.inf if error == 0 else 10 * math.log10(PEAK**2 / error)
    drift = any(c[2] for c in coded)
    if drift:
        logger.warning("drift in %s sweep at qp=%d lambda=%g", method, qp, lam)
    return SweepResult(method, qp, lam, bits, value, error, drift)


def sweep_settings(axis: str, values, qp_si: int) -> list[tuple[int, float]]:
    """(qp, lambda) pairs: lambdas at a fixed QP, or QPs with their own lambdas"""
    if axis == "lambda":
        return [(qp_si, float(v)) for v in values]
    if axis == "qp":
        return [(int(v), lambda_from_qp(int(v))) for v in values]
    raise ConfigurationError(f"sweep axis must be one of {AXES}, got {axis!r}")


def check_monotone(results) -> list[tuple[SweepResult, SweepResult]]:
    """Adjacent pairs, by decreasing lambda, where distortion went up"""
    ordered = sorted(results, key=lambda r: -r.lam)
    return [(a, b) for a, b in zip(ordered, ordered[1:]) if b.distortion > a.distortion]


def rd_sweep(
    corpus,
    method: str = "optimized",
    axis: str = "lambda",
    values=None,
    config: CodecConfig | None = None,
    workers: int | None = None,
    strict: bool = False,
) -> list[SweepResult]:
    """One RD point per setting, in the order of ``values``"""
    if method not in METHODS:
        raise ConfigurationError(f"method must be one of {METHODS}, got {method!r}")
    if method == "intra" and axis != "qp":
        raise ConfigurationError("the intra baseline is swept over QP")
    corpus = list(corpus)
    if not corpus:
        raise ConfigurationError("empty sweep corpus")
    config = CodecConfig.from_settings() if config is None else config
    if values is None:
        values = DEFAULT_LAMBDAS if axis == "lambda" else DEFAULT_QPS
    workers = settings.MFRAME["SWEEP_WORKERS"] if workers is None else workers
    points = sweep_settings(axis, values, config.qp_si)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(
            executor.map(lambda p: run_point(method, corpus, p[0], p[1], config), points)
        )

    for a, b in check_monotone(results):
        message = (
            f"{method}: distortion rose from {a.distortion:.3f} to {b.distortion:.3f} "
            f"as lambda fell from {a.lam:g} to {b.lam:g}"
        )
        if strict:
            raise CurveError(message)
        logger.warning(message)
    return results


def to_curve(results, method: str | None = None) -> RdCurve:
    results = list(results)
    method = method or (results[0].method if results else "")
    return RdCurve(method, tuple(r.point for r in results))


def write_csv(results, stream=None) -> str:
    out = io.StringIO() if stream is None else stream
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(result.row())
    return out.getvalue() if stream is None else ""


def read_csv(path) -> dict[str, RdCurve]:
    """RD curves of a sweep CSV, keyed by method"""
    rates, psnrs = {}, {}
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise CurveError(f"{path} lacks columns {sorted(missing)}")
        for row in reader:
            rates.setdefault(row["method"], []).append(float(row["rate_bits"]))
            psnrs.setdefault(row["method"], []).append(float(row["psnr_db"]))
    return {m: RdCurve.from_arrays(m, rates[m], psnrs[m]) for m in rates}
