"""Piecewise-constant merge operator and its feasibility arithmetic.

The merge operator is

    f(x) = floor((x + c) / W) * W + W/2 - c

With odd W the output is a half-integer, so the codec carries reconstructions
as doubled integers (``2 * f(x)``) and only multiplies by Q/2 at the very end.
All arithmetic here is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ContractViolation, InfeasibleStepError, StructuralError


def pwc_apply(x: int, W: int, c: int) -> Fraction:
    """Exact value of the merge operator for one q-coeff"""
    if W < 1:
        raise ContractViolation(f"step size must be >= 1, got {W}")
    return Fraction(pwc_apply_doubled(int(x), int(W), int(c)), 2)


def pwc_apply_doubled(x, W, c):
    """``2 * f(x)`` as integers; works elementwise on numpy arrays"""
    return 2 * ((x + c) // W) * W + W - 2 * c


def coset_decode(si_value: int, coset_index: int, W: int) -> int:
    """Integer with residue ``coset_index`` mod W closest to ``si_value``.

    Ties resolve toward the larger candidate, matching the half-open
    interval the floor-based merge operator maps onto one value.
    """
    if not 0 <= coset_index < W:
        raise ContractViolation(f"coset index {coset_index} outside [0, {W})")
    below = si_value - ((si_value - coset_index) % W)
    above = below + W
    if si_value - below < above - si_value:
        return below
    return above


@dataclass(frozen=True)
class MergeStat:
    """Per-frequency spread of the q-coeffs of one block across SI frames.

    Index 0 of the inputs is the target itself.
    """

    x_min: np.ndarray
    x_max: np.ndarray
    z_star: np.ndarray
    z_target: np.ndarray


def compute_merge_stats(si_qcoeffs) -> MergeStat:
    """Min, max, maximum pair difference and maximum target difference.

    ``si_qcoeffs`` holds N+1 coefficient vectors, the target first. Extra
    leading axes are allowed, so a whole frame can be processed as an array
    of shape (N+1, n_blocks, K).
    """
    try:
        x = np.asarray(si_qcoeffs, dtype=np.int64)
    except ValueError as exc:
        raise StructuralError(f"q-coeff vectors have mismatched lengths: {exc}") from exc
    if x.dtype == object or x.ndim < 2:
        raise StructuralError("expected N+1 equally long q-coeff vectors")
    if x.shape[0] < 2:
        raise StructuralError("need the target and at least one SI frame")
    x_min = x.min(axis=0)
    x_max = x.max(axis=0)
    z_target = np.abs(x[1:] - x[0]).max(axis=0)
    return MergeStat(x_min, x_max, x_max - x_min, z_target)


@dataclass(frozen=True)
class FeasibleRange:
    """Half-open shift interval [lo, hi) that merges one block.

    Shifts are periodic in W, so :meth:`canonical` reduces the interval
    into [0, W).
    """

    lo: int
    hi: int
    W: int

    def __len__(self):
        return self.hi - self.lo

    def canonical(self) -> np.ndarray:
        """Feasible shifts reduced into [0, W), ascending"""
        return np.unique(np.arange(self.lo, self.hi) % self.W)

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.W, dtype=bool)
        mask[self.canonical()] = True
        return mask

    def __contains__(self, c):
        return (c - self.lo) % self.W < len(self)


def feasible_shift_range(x_min: int, x_max: int, W: int) -> FeasibleRange:
    """Every shift that maps all integers in [x_min, x_max] to one interval"""
    if W <= x_max - x_min:
        raise InfeasibleStepError(
            f"step size {W} does not exceed spread {x_max - x_min}"
        )
    alpha = x_min % W
    beta = x_max % W
    if alpha <= beta:
        return FeasibleRange(-alpha, W - beta, W)
    return FeasibleRange(W - alpha, W - beta, W)


def feasible_mask(x_min, x_max, W: int) -> np.ndarray:
    """Vectorized feasibility table, shape (n, W), for n blocks at one frequency"""
    x_min = np.asarray(x_min, dtype=np.int64)[:, np.newaxis]
    x_max = np.asarray(x_max, dtype=np.int64)[:, np.newaxis]
    if W <= (x_max - x_min).max(initial=0):
        raise InfeasibleStepError(f"step size {W} too small for the group")
    c = np.arange(W, dtype=np.int64)[np.newaxis, :]
    return (x_min + c) // W == (x_max + c) // W


def fixed_target_shift(X0, W_sharp: int):
    """Shift that makes the merge operator return X0 exactly.

    Valid for every input in [X0 - W/2, X0 + W/2); W must be even.
    """
    if W_sharp % 2:
        raise ContractViolation(f"fixed-target step size must be even, got {W_sharp}")
    return W_sharp // 2 - np.mod(X0, W_sharp)


def fixed_target_params(X0: int, W_sharp: int) -> int:
    return int(fixed_target_shift(int(X0), int(W_sharp)))


def fixed_target_step(z_target: int) -> int:
    return 2 * int(z_target) + 2
