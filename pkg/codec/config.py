"""Codec parameters.

Defaults come from ``settings.MFRAME``; a key=value file can override them
and command-line flags override both.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from decouple import Config, RepositoryEnv, UndefinedValueError
from django.conf import settings

from .exceptions import ConfigurationError
from .rdopt import lambda_from_qp
from .transform import MAX_QP, SCANS, VALID_EDGES, qstep

MODES = ("optimized", "fixed")
DISTRIBUTIONS = ("spike", "naive")

# Optimized mode codes at step 1, the H.264-style QP of which is 4.
OPTIMIZED_QP_M = 4


@dataclass(frozen=True)
class CodecConfig:
    block_edge: int = 16
    scan: str = "zigzag"
    qp_si: int = 27
    mode: str = "optimized"
    distribution: str = "spike"
    max_spikes: int = 16
    spike_patience: int = 3
    full_spike_sweep: bool = False
    floor_mass: float = 0.01
    epsilon: float = 1e-6
    rd_passes: int = 2
    lam: float | None = None

    def __post_init__(self):
        if self.block_edge not in VALID_EDGES:
            raise ConfigurationError(
                f"block edge must be one of {VALID_EDGES}, got {self.block_edge}"
            )
        if self.scan not in SCANS:
            raise ConfigurationError(f"scan must be one of {SCANS}, got {self.scan!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigurationError(
                f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}"
            )
        if not 1 <= self.qp_si <= MAX_QP:
            raise ConfigurationError(f"qp_si must lie in [1, {MAX_QP}], got {self.qp_si}")
        if not 1 <= self.max_spikes <= 32:
            raise ConfigurationError(f"max_spikes must lie in [1, 32], got {self.max_spikes}")
        if self.spike_patience < 1 or self.rd_passes < 1:
            raise ConfigurationError("spike_patience and rd_passes must be positive")
        if not 0 < self.floor_mass < 1:
            raise ConfigurationError(f"floor_mass must lie in (0, 1), got {self.floor_mass}")
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.lam is not None and self.lam < 0:
            raise ConfigurationError(f"lambda must be non-negative, got {self.lam}")

    @property
    def lagrange(self) -> float:
        """Explicit lambda, or the one implied by qp_si"""
        return lambda_from_qp(self.qp_si) if self.lam is None else float(self.lam)

    @property
    def quantizer_step(self) -> float:
        return qstep(self.qp_si) if self.mode == "fixed" else 1.0

    @property
    def qp_m(self) -> int:
        return self.qp_si if self.mode == "fixed" else OPTIMIZED_QP_M

    def replace(self, **changes) -> "CodecConfig":
        """Copy with the non-None ``changes`` applied"""
        changes = {key: value for key, value in changes.items() if value is not None}
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_settings(cls, **overrides) -> "CodecConfig":
        values = _settings_values()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path, **overrides) -> "CodecConfig":
        """Read MFRAME_* keys from a key=value file, settings as fallback"""
        try:
            source = Config(RepositoryEnv(str(path)))
        except FileNotFoundError as exc:
            raise ConfigurationError(f"config file not found: {path}") from exc
        values = _settings_values()
        for field in dataclasses.fields(cls):
            key = "MFRAME_LAMBDA" if field.name == "lam" else f"MFRAME_{field.name.upper()}"
            if key not in source.repository:
                continue
            try:
                values[field.name] = source(key, cast=_CASTS.get(field.name, str))
            except (ValueError, UndefinedValueError) as exc:
                raise ConfigurationError(f"bad value for {key} in {path}") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


_CASTS = {
    "block_edge": int,
    "qp_si": int,
    "max_spikes": int,
    "spike_patience": int,
    "rd_passes": int,
    "full_spike_sweep": bool,
    "floor_mass": float,
    "epsilon": float,
    "lam": float,
}


def _settings_values() -> dict:
    mframe = getattr(settings, "MFRAME", {})
    values = {}
    for field in dataclasses.fields(CodecConfig):
        key = field.name.upper()
        if key in mframe:
            values[field.name] = mframe[key]
    return values
