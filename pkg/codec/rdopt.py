"""RD-optimized target merging: shift distributions and shift selection.

For one frequency of one block group the encoder knows, per block, which
shifts keep every SI q-coeff in one interval (the feasible set) and how far
each feasible shift puts the reconstruction from the target coefficient.
That is a :class:`ShiftProblem`. The shift model is fitted on the histogram
of the distortion-minimizing shifts with a rate-constrained Lloyd-Max
iteration, the number of spikes is chosen by the realized aggregate
Lagrangian, and finally every block picks the shift minimizing
d + lambda * (-log2 P(c)).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .distribution import MAX_SPIKES, PROB_BITS, ShiftDistribution
from .exceptions import ContractViolation, InfeasibleStepError
from .pwc import FeasibleRange, feasible_mask, pwc_apply_doubled

logger = logging.getLogger(__name__)

SPIKE_COUNT_BITS = 5


def lambda_from_qp(qp_si: float) -> float:
    """Lagrange multiplier 2^(0.6 QP - 12), evaluated without rounding drift"""
    return float(2.0 ** ((3 * qp_si - 60) / 5))


def dequantize_doubled(doubled, Q: float):
    """Coefficient value of a doubled reconstruction"""
    return np.asarray(doubled, dtype=np.float64) * (Q / 2.0)


@dataclass(frozen=True)
class RdCost:
    distortion: float
    rate: float
    lam: float = 0.0

    @property
    def lagrangian(self):
        return self.distortion + self.lam * self.rate

    def __add__(self, other: "RdCost"):
        return RdCost(self.distortion + other.distortion, self.rate + other.rate, self.lam)


@dataclass(frozen=True)
class ShiftHistogram:
    """Counts of distortion-minimizing shifts over [0, W)"""

    counts: np.ndarray

    @classmethod
    def from_shifts(cls, shifts, W: int) -> "ShiftHistogram":
        return cls(np.bincount(np.asarray(shifts, dtype=np.int64), minlength=W)[:W])

    @property
    def W(self):
        return len(self.counts)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def support(self):
        return np.flatnonzero(self.counts)


class ShiftProblem:
    """Per-block distortion of every shift for one frequency group.

    ``distortion[b, c]`` is the squared coefficient error of block b with
    shift c, and +inf where c would break identical merging.
    """

    def __init__(self, distortion: np.ndarray):
        self.distortion = np.asarray(distortion, dtype=np.float64)
        if self.distortion.ndim != 2:
            raise ContractViolation("distortion table must be 2-D (blocks x shifts)")
        if len(self) and not np.isfinite(self.distortion).any(axis=1).all():
            raise InfeasibleStepError("a block has an empty feasible shift set")

    @classmethod
    def from_blocks(cls, x0, y0, x_min, x_max, W: int, Q: float) -> "ShiftProblem":
        x0 = np.asarray(x0, dtype=np.int64)[:, np.newaxis]
        y0 = np.asarray(y0, dtype=np.float64)[:, np.newaxis]
        feasible = feasible_mask(x_min, x_max, W)
        c = np.arange(W, dtype=np.int64)[np.newaxis, :]
        recon = dequantize_doubled(pwc_apply_doubled(x0, W, c), Q)
        distortion = np.where(feasible, (y0 - recon) ** 2, np.inf)
        return cls(distortion)

    def __len__(self):
        return self.distortion.shape[0]

    @property
    def W(self):
        return self.distortion.shape[1]

    def distortion_min_shifts(self) -> np.ndarray:
        return np.argmin(self.distortion, axis=1)

    def histogram(self) -> ShiftHistogram:
        return ShiftHistogram.from_shifts(self.distortion_min_shifts(), self.W)

    def select(self, dist: ShiftDistribution, lam: float):
        """RD-optimal shift of every block under ``dist``.

        Returns (shifts, distortion, rate_bits) arrays.
        """
        if dist.W != self.W:
            raise ContractViolation(f"distribution over {dist.W} shifts, problem has {self.W}")
        bits = np.asarray(dist.bits)
        if lam == 0:
            cost = self.distortion
        else:
            cost = self.distortion + lam * bits[np.newaxis, :]
        shifts = np.argmin(cost, axis=1)
        rows = np.arange(len(self))
        return shifts, self.distortion[rows, shifts], bits[shifts]

    def aggregate(self, dist: ShiftDistribution, lam: float) -> float:
        """Summed Lagrangian of all blocks plus the model's side information"""
        _, distortion, rate = self.select(dist, lam)
        return float(distortion.sum() + lam * (rate.sum() + distribution_side_bits(dist)))


def shift_field_bits(W: int) -> int:
    return max(1, math.ceil(math.log2(W))) if W > 1 else 0


def distribution_side_bits(dist: ShiftDistribution) -> int:
    """Header bits spent on a spike model"""
    if dist.uniform_model or dist.W == 1:
        return 0
    return SPIKE_COUNT_BITS + dist.H * (shift_field_bits(dist.W) + PROB_BITS)


# ---------------------------------------------------------------------------
# Single-block API


def _single_problem(x0, y0, Q, W, feasible: FeasibleRange) -> ShiftProblem:
    if len(feasible) <= 0:
        raise InfeasibleStepError("empty feasible shift set")
    c = np.arange(W, dtype=np.int64)
    recon = dequantize_doubled(pwc_apply_doubled(int(x0), W, c), Q)
    distortion = np.where(feasible.mask(), (float(y0) - recon) ** 2, np.inf)
    return ShiftProblem(distortion[np.newaxis, :])


def distortion_min_shift(x0: int, y0: float, Q: float, W: int, feasible: FeasibleRange) -> int:
    """Feasible shift with the smallest coefficient error; ties pick the smallest"""
    return int(_single_problem(x0, y0, Q, W, feasible).distortion_min_shifts()[0])


def select_shift(
    x0: int,
    y0: float,
    Q: float,
    dist: ShiftDistribution,
    feasible: FeasibleRange,
    lam: float,
):
    """Shift minimizing d + lambda * (-log2 P(c)) within the feasible set"""
    problem = _single_problem(x0, y0, Q, dist.W, feasible)
    shifts, distortion, rate = problem.select(dist, lam)
    return int(shifts[0]), RdCost(float(distortion[0]), float(rate[0]), lam)


# ---------------------------------------------------------------------------
# Spike + uniform distribution fitting


def build_distribution(W: int, spikes, masses, floor_mass: float = 0.01) -> ShiftDistribution:
    """Spike + uniform distribution from spike locations and bin masses.

    The uniform floor takes at most ``floor_mass`` in total and never exceeds
    the smallest spike probability.
    """
    masses = np.asarray(masses, dtype=np.float64)
    masses = masses / masses.sum()
    others = W - len(spikes)
    if others == 0:
        p_c = 0.0
    else:
        p_c = min(floor_mass / others, (1.0 - floor_mass) * float(masses.min()))
    scale = 1.0 - others * p_c
    return ShiftDistribution(
        W, tuple((int(s), float(m * scale)) for s, m in zip(spikes, masses)), p_c
    )


def _single_spike(W: int, location: int = 0, floor_mass: float = 0.01) -> ShiftDistribution:
    return build_distribution(W, [location], [1.0], floor_mass)


def lloyd_max_init(hist: ShiftHistogram, H: int, max_iter: int = 100) -> list[int]:
    """Unconstrained Lloyd-Max on g(c°), from H evenly spaced spikes.

    Returns the distinct integer spike locations of the non-empty cells.
    """
    W = hist.W
    if hist.total == 0:
        return [0]
    if not 1 <= H <= W:
        raise ContractViolation(f"spike count must lie in [1, {W}], got {H}")
    support = hist.support
    weights = hist.counts[support].astype(np.float64)
    spikes = (np.arange(H) + 0.5) * W / H
    assign = None
    for _ in range(max_iter):
        new_assign = np.argmin(np.abs(support[:, np.newaxis] - spikes[np.newaxis, :]), axis=1)
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign
        for i in range(H):
            members = assign == i
            if members.any():
                spikes[i] = np.average(support[members], weights=weights[members])
    used = np.unique(assign)
    locations = {int(np.clip(np.floor(spikes[i] + 0.5), 0, W - 1)) for i in used}
    return sorted(locations)


class _Bins:
    """Spike locations with the bin boundaries b_0 = 0 < ... < b_H = W.

    Prefix sums of g, g*c and g*c^2 make every bin cost O(1).
    """

    def __init__(self, counts: np.ndarray, spikes: list[int], boundaries: list[int]):
        positions = np.arange(len(counts), dtype=np.float64)
        zero = np.zeros(1)
        self.s0 = np.concatenate([zero, np.cumsum(counts)]).tolist()
        self.s1 = np.concatenate([zero, np.cumsum(counts * positions)]).tolist()
        self.s2 = np.concatenate([zero, np.cumsum(counts * positions * positions)]).tolist()
        self.spikes = spikes
        self.boundaries = boundaries

    def mass(self, lo, hi):
        return self.s0[hi] - self.s0[lo]

    def bin_cost(self, lo, hi, spike, lam, total):
        mass = self.mass(lo, hi)
        if mass <= 0:
            return 0.0
        first = self.s1[hi] - self.s1[lo]
        second = self.s2[hi] - self.s2[lo]
        distortion = max(second - 2.0 * spike * first + spike * spike * mass, 0.0)
        return distortion + lam * mass * -math.log2(mass / total)

    def objective(self, lam, total):
        b = self.boundaries
        return sum(
            self.bin_cost(b[i], b[i + 1], s, lam, total) for i, s in enumerate(self.spikes)
        )

    def masses(self):
        b = self.boundaries
        return [self.mass(b[i], b[i + 1]) for i in range(len(self.spikes))]

    def prune(self):
        """Drop spikes whose bins hold no mass"""
        keep = [i for i, m in enumerate(self.masses()) if m > 0]
        if len(keep) == len(self.spikes):
            return
        b = self.boundaries
        self.boundaries = [0] + [b[i] for i in keep[1:]] + [b[-1]]
        self.spikes = [self.spikes[i] for i in keep]

    def update_spikes(self):
        b = self.boundaries
        for i in range(len(self.spikes)):
            lo, hi = b[i], b[i + 1]
            mass = self.mass(lo, hi)
            if mass > 0:
                mean = (self.s1[hi] - self.s1[lo]) / mass
                self.spikes[i] = int(math.floor(mean + 0.5))

    def update_boundaries(self, lam, total):
        b = self.boundaries
        for j in range(1, len(self.spikes)):
            left, right = self.spikes[j - 1], self.spikes[j]
            best_b, best_cost = b[j], None
            # a boundary on the left spike empties bin j - 1; prune() drops it
            for candidate in range(left, right + 1):
                cost = self.bin_cost(b[j - 1], candidate, left, lam, total) + self.bin_cost(
                    candidate, b[j + 1], right, lam, total
                )
                if best_cost is None or cost < best_cost:
                    best_b, best_cost = candidate, cost
            b[j] = best_b


def rc_lloyd_max(
    hist: ShiftHistogram,
    H: int,
    lam: float,
    W: int | None = None,
    *,
    epsilon: float = 1e-6,
    floor_mass: float = 0.01,
    max_iter: int = 100,
    history: list | None = None,
) -> ShiftDistribution:
    """Rate-constrained Lloyd-Max fit of an H-spike distribution.

    Alternates spike updates (bin averages) and exhaustive boundary updates
    until successive probability vectors differ by at most ``epsilon``.
    The objective after every half-step is appended to ``history`` when given.
    """
    W = hist.W if W is None else W
    if W != hist.W:
        raise ContractViolation(f"histogram covers {hist.W} shifts, expected {W}")
    if H < 1:
        raise ContractViolation(f"spike count must be positive, got {H}")
    total = float(hist.total)
    if total == 0:
        return _single_spike(W, 0, floor_mass)

    spikes = lloyd_max_init(hist, min(H, W))
    boundaries = [0] + [(a + b) // 2 + 1 for a, b in zip(spikes, spikes[1:])] + [W]
    bins = _Bins(hist.counts.astype(np.float64), spikes, boundaries)
    bins.prune()

    def current():
        return build_distribution(W, bins.spikes, bins.masses(), floor_mass)

    if history is not None:
        history.append(bins.objective(lam, total))
    pmf = current().pmf
    for iteration in range(max_iter):
        bins.update_spikes()
        if history is not None:
            history.append(bins.objective(lam, total))
        bins.update_boundaries(lam, total)
        bins.prune()
        if history is not None:
            history.append(bins.objective(lam, total))
        new_pmf = current().pmf
        change = float(np.abs(new_pmf - pmf).max())
        pmf = new_pmf
        if change <= epsilon:
            break
    logger.debug(
        "rc-LM W=%d H=%d lambda=%g: %d spikes after %d iterations",
        W, H, lam, len(bins.spikes), iteration + 1,
    )
    return current()


def naive_distribution(problem: ShiftProblem, lam: float, floor_mass: float = 0.01):
    """Empirical distribution of the shifts chosen under g(c°) itself.

    One RD selection pass with the distortion-minimizing histogram as the
    model; the histogram of the resulting shifts becomes the model. At most
    32 of its values are kept as spikes, the rest fall to the floor.
    """
    W = problem.W
    hist = problem.histogram()
    if W == 1 or hist.total == 0:
        return _single_spike(W, 0, floor_mass).quantized()
    initial = _histogram_distribution(hist, floor_mass)
    shifts, _, _ = problem.select(initial.quantized(), lam)
    return _histogram_distribution(ShiftHistogram.from_shifts(shifts, W), floor_mass).quantized()


def _histogram_distribution(hist: ShiftHistogram, floor_mass: float) -> ShiftDistribution:
    support = hist.support
    if len(support) > MAX_SPIKES:
        order = np.argsort(-hist.counts[support], kind="stable")[:MAX_SPIKES]
        support = np.sort(support[order])
    return build_distribution(hist.W, support.tolist(), hist.counts[support], floor_mass)


def optimal_distribution(
    problem: ShiftProblem,
    lam: float,
    *,
    max_spikes: int = 16,
    patience: int = 3,
    full_sweep: bool = False,
    epsilon: float = 1e-6,
    floor_mass: float = 0.01,
) -> ShiftDistribution:
    """Best spike + uniform coding model over the number of spikes H.

    Every candidate is quantized to the coding model and scored by the
    realized aggregate Lagrangian of the group. H stops at min(W, max_spikes)
    and after ``patience`` consecutive non-improving H, unless
    ``full_sweep`` asks for every H up to min(W, 32).
    """
    W = problem.W
    hist = problem.histogram()
    if W == 1 or hist.total == 0:
        return _single_spike(W, 0, floor_mass).quantized()
    cap = min(W, MAX_SPIKES) if full_sweep else min(W, max_spikes, MAX_SPIKES)
    occupied = len(hist.support)
    best, best_cost, stale = None, math.inf, 0
    for H in range(1, cap + 1):
        dist = rc_lloyd_max(hist, H, lam, W, epsilon=epsilon, floor_mass=floor_mass).quantized()
        cost = problem.aggregate(dist, lam)
        logger.debug("W=%d H=%d: %d spikes, aggregate %.3f", W, H, dist.H, cost)
        if cost < best_cost:
            best, best_cost, stale = dist, cost, 0
        else:
            stale += 1
            if not full_sweep and stale >= patience:
                break
        if H >= occupied:
            break
    return best
