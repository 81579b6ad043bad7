"""Side-information generation.

Each SI frame is a coarse approximation of the target, standing in for a
P-frame predicted from a different origin stream:

* ``quantized-noise`` adds seeded Gaussian noise with standard deviation
  ``noise_scale * qstep(qp_si)`` and re-codes the result at ``qp_si``;
* ``shifted-content`` translates the target by one or two pixels and
  re-codes it, like a neighbouring view;
* ``mixed`` does both.

Re-coding is skipped when ``qstep(qp_si) <= 1``, so QP 4 and below with no
noise reproduce the target exactly.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from codec.exceptions import ConfigurationError
from codec.frames import Frame, check_same_dimensions
from codec.pwc import compute_merge_stats
from codec.transform import MAX_QP, VALID_EDGES, frame_qcoeffs, intra_reconstruct, qstep

from .sources import translate

logger = logging.getLogger(__name__)

DIVERGENCE_MODELS = ("quantized-noise", "shifted-content", "mixed")
SHIFTS = [(dy, dx) for dy in range(-2, 3) for dx in range(-2, 3) if (dy, dx) != (0, 0)]


@dataclass(frozen=True)
class SiGenConfig:
    seed: int = 2024
    n_si: int = 3
    qp_si: int = 27
    divergence_model: str = "quantized-noise"
    noise_scale: float = 0.125
    block_edge: int = 16
    scan: str = "zigzag"

    def __post_init__(self):
        if self.n_si < 1:
            raise ConfigurationError(f"n_si must be >= 1, got {self.n_si}")
        if not 1 <= self.qp_si <= MAX_QP:
            raise ConfigurationError(f"qp_si must lie in [1, {MAX_QP}], got {self.qp_si}")
        if self.divergence_model not in DIVERGENCE_MODELS:
            raise ConfigurationError(
                f"divergence model must be one of {DIVERGENCE_MODELS}, "
                f"got {self.divergence_model!r}"
            )
        if self.noise_scale < 0:
            raise ConfigurationError("noise_scale must be non-negative")
        if self.block_edge not in VALID_EDGES:
            raise ConfigurationError(f"block edge must be one of {VALID_EDGES}")

    @classmethod
    def from_settings(cls, **overrides) -> "SiGenConfig":
        mframe = settings.MFRAME
        values = {
            "seed": mframe["SEED"],
            "n_si": mframe["N_SI"],
            "qp_si": mframe["QP_SI"],
            "divergence_model": mframe["DIVERGENCE"],
            "noise_scale": mframe["NOISE_SCALE"],
            "block_edge": mframe["BLOCK_EDGE"],
            "scan": mframe["SCAN"],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def replace(self, **changes) -> "SiGenConfig":
        return dataclasses.replace(self, **changes)


def _recode(frame: Frame, cfg: SiGenConfig) -> Frame:
    Q = qstep(cfg.qp_si)
    if Q <= 1:
        return frame
    return intra_reconstruct(frame, Q, cfg.block_edge, cfg.scan)


def predict_si(target: Frame, cfg: SiGenConfig, index: int) -> Frame:
    """The ``index``-th SI frame of the set; depends only on (seed, index)"""
    rng = np.random.default_rng([cfg.seed, index])
    frame = target
    if cfg.divergence_model in ("shifted-content", "mixed"):
        dy, dx = SHIFTS[rng.integers(len(SHIFTS))]
        frame = translate(frame, dy, dx)
    if cfg.divergence_model in ("quantized-noise", "mixed"):
        sigma = cfg.noise_scale * qstep(cfg.qp_si)
        noisy = frame.samples + rng.normal(0.0, sigma, size=frame.shape)
        frame = Frame(np.clip(np.floor(noisy + 0.5), 0, 255), frame_id=frame.frame_id)
    si = _recode(frame, cfg)
    return Frame(si.samples, frame_id=f"si{index}({target.frame_id})")


def generate_si_set(target: Frame, cfg: SiGenConfig | None = None) -> list[Frame]:
    """N deterministic SI frames approximating ``target``"""
    cfg = SiGenConfig.from_settings() if cfg is None else cfg
    frames = [predict_si(target, cfg, n) for n in range(cfg.n_si)]
    logger.debug("generated %d %s SI frames for %s", cfg.n_si, cfg.divergence_model, target)
    return frames


@dataclass(frozen=True, eq=False)
class ZStarProfile:
    """Maximum pair differences Z*_b(k), shape (n_blocks, K)"""

    values: np.ndarray

    @property
    def histogram(self) -> np.ndarray:
        return np.bincount(self.values.ravel())

    def fraction_at_most(self, z: int, k: int | None = None) -> float:
        values = self.values if k is None else self.values[:, k]
        return float(np.count_nonzero(values <= z)) / values.size

    @classmethod
    def concatenate(cls, profiles) -> "ZStarProfile":
        return cls(np.concatenate([p.values for p in profiles]))


def zstar_profile(
    target: Frame,
    si_frames,
    edge: int = 16,
    Q: float = 1.0,
    scan: str = "zigzag",
    include_target: bool = False,
) -> ZStarProfile:
    """Z*_b(k) of every block and frequency at quantizer step Q.

    By default only the SI frames are compared, which is the spread a merge
    operator has to absorb; ``include_target`` adds the target as frame 0.
    """
    check_same_dimensions(target, *si_frames)
    frames = ([target] if include_target else []) + list(si_frames)
    if len(frames) < 2:
        return ZStarProfile(np.zeros_like(frame_qcoeffs(target, edge, Q, scan)))
    X = np.stack([frame_qcoeffs(frame, edge, Q, scan) for frame in frames])
    return ZStarProfile(compute_merge_stats(X).z_star)
