"""The "spike + uniform" shift probability model and its coding tables.

A distribution over shifts in [0, W) puts probability ``p_s_i`` on H spike
locations and one small constant ``p_c`` on every other shift. What both the
encoder and the decoder actually use is the *quantized* model: spike
probabilities as 12-bit fixed point, expanded to integer frequencies for the
arithmetic coder. :meth:`ShiftDistribution.quantized` returns that model as a
distribution, so rate estimates equal the coder's ideal code lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ContractViolation

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
FREQ_SCALE = 16
FREQ_TOTAL = PROB_ONE * FREQ_SCALE
MAX_SPIKES = 32


@dataclass(frozen=True)
class ShiftDistribution:
    """Probability of each shift in [0, W) as H spikes plus a uniform floor"""

    W: int
    spikes: tuple[tuple[int, float], ...]
    uniform_floor: float
    uniform_model: bool = False
    codes: tuple[int, ...] | None = None

    def __post_init__(self):
        locations = [loc for loc, _ in self.spikes]
        if any(b <= a for a, b in zip(locations, locations[1:])):
            raise ContractViolation("spike locations must be strictly increasing")
        if locations and (locations[0] < 0 or locations[-1] >= self.W):
            raise ContractViolation(f"spike locations must lie in [0, {self.W})")
        if not locations:
            raise ContractViolation("a shift distribution needs at least one spike")

    @property
    def H(self):
        return len(self.spikes)

    @property
    def locations(self):
        return [loc for loc, _ in self.spikes]

    @cached_property
    def pmf(self) -> np.ndarray:
        """Probability vector over [0, W)"""
        pmf = np.full(self.W, self.uniform_floor, dtype=np.float64)
        for loc, p in self.spikes:
            pmf[loc] = p
        pmf.setflags(write=False)
        return pmf

    @cached_property
    def bits(self) -> np.ndarray:
        """Ideal code length -log2 P(c) of every shift"""
        with np.errstate(divide="ignore"):
            bits = -np.log2(self.pmf)
        bits.setflags(write=False)
        return bits

    def total_mass(self) -> float:
        return float(sum(p for _, p in self.spikes) + (self.W - self.H) * self.uniform_floor)

    def probability_codes(self) -> list[int]:
        """12-bit fixed-point spike probabilities as transmitted"""
        if self.codes is not None:
            return list(self.codes)
        return [int(min(max(round(p * PROB_ONE), 1), PROB_ONE - 1)) for _, p in self.spikes]

    def frequencies(self) -> np.ndarray:
        """Integer frequency table of the coding model"""
        if self.uniform_model:
            return np.ones(self.W, dtype=np.int64)
        return coding_frequencies(self.W, self.locations, self.probability_codes())

    def quantized(self) -> "ShiftDistribution":
        """The distribution the arithmetic coder actually realises"""
        if self.uniform_model or self.codes is not None:
            return self
        return from_codes(self.W, self.locations, self.probability_codes())


def coding_frequencies(W: int, locations, codes) -> np.ndarray:
    if W == 1:
        return np.ones(1, dtype=np.int64)
    spike_freqs = [FREQ_SCALE * int(code) for code in codes]
    freqs = np.empty(W, dtype=np.int64)
    n_other = W - len(spike_freqs)
    if n_other:
        spare = FREQ_TOTAL - sum(spike_freqs)
        floor = min(max(1, spare // n_other), min(spike_freqs))
        freqs.fill(floor)
    freqs[list(locations)] = spike_freqs
    return freqs


def from_codes(W: int, locations, codes) -> ShiftDistribution:
    """Rebuild the coding model from transmitted spike fields"""
    freqs = coding_frequencies(W, locations, codes)
    total = float(freqs.sum())
    locations = [int(loc) for loc in locations]
    spikes = tuple((loc, float(freqs[loc]) / total) for loc in locations)
    others = np.setdiff1d(np.arange(W), locations)
    floor = float(freqs[others[0]]) / total if len(others) else 0.0
    return ShiftDistribution(W, spikes, floor, codes=tuple(int(q) for q in codes))


def uniform(W: int) -> ShiftDistribution:
    """Every shift equally likely; used by fixed-target groups"""
    return ShiftDistribution(W, ((0, 1.0 / W),), 1.0 / W, uniform_model=True)
