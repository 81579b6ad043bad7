"""M-frame encoder and decoder.

Every block is SKIP (all SI q-coeffs already agree), INTRA (coded from the
target alone) or MERGE. MERGE blocks with EOB >= k form the merge group of
frequency k, which shares one step size W(k) and one shift model; each block
sends its own shift. Reconstructions are carried as doubled integers so odd
step sizes stay exact, and the decoder output does not depend on which SI
frame it was given.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import CodecConfig
from .distribution import uniform
from .entropy import intra_block_bits, last_nonzero, ue_lengths
from .exceptions import ConfigurationError, DimensionMismatchError, StructuralError
from .frames import Frame, check_same_dimensions
from .pwc import (
    MergeStat,
    compute_merge_stats,
    fixed_target_shift,
    fixed_target_step,
    pwc_apply_doubled,
)
from .rdopt import (
    ShiftProblem,
    dequantize_doubled,
    distribution_side_bits,
    naive_distribution,
    optimal_distribution,
)
from .syntax import (
    BlockMode,
    FrequencyParams,
    MFrameBitstream,
    MFrameHeader,
    MFramePayload,
    parse,
    read_intra_frame,
    write_intra_frame,
    write_mframe,
)
from .transform import (
    frame_coefficients,
    frame_qcoeffs,
    qstep,
    quantize_array,
    reconstruct_pixels,
)

logger = logging.getLogger(__name__)

MAX_SI = 255
FIXED_MODE_PASSES = 4


@dataclass(frozen=True, eq=False)
class EncodeResult:
    """An encoded M-frame with the reconstruction every SI frame decodes to"""

    bitstream: MFrameBitstream
    reconstruction: Frame
    distortion: float
    lam: float
    requested_mode: str
    block_modes: np.ndarray
    eobs: np.ndarray

    @property
    def mode(self) -> str:
        return self.bitstream.header.mode

    @property
    def rate_bits(self) -> int:
        return self.bitstream.rate_bits

    @property
    def lagrangian(self) -> float:
        return self.distortion + self.lam * self.rate_bits

    def mode_counts(self) -> dict[str, int]:
        return {m.name.lower(): int(np.count_nonzero(self.block_modes == m)) for m in BlockMode}


@dataclass(frozen=True, eq=False)
class _Analysis:
    """q-coeffs of the target (row 0) and the SI frames, with their spread"""

    X: np.ndarray
    Y0: np.ndarray
    stats: MergeStat
    Q: float

    @property
    def X0(self):
        return self.X[0]

    @property
    def n_blocks(self):
        return self.X.shape[1]

    @property
    def K(self):
        return self.X.shape[2]


@dataclass(frozen=True, eq=False)
class _FrequencyPlan:
    params: FrequencyParams
    members: np.ndarray
    shifts: np.ndarray


def _analyse(target: Frame, si_frames, edge: int, Q: float, scan: str) -> _Analysis:
    frames = [target, *si_frames]
    X = np.stack([frame_qcoeffs(frame, edge, Q, scan) for frame in frames])
    Y0 = frame_coefficients(target, edge, scan)
    return _Analysis(X, Y0, compute_merge_stats(X), Q)


# ---------------------------------------------------------------------------
# Block decisions


def mode_decide(si_qcoeffs, merge_cost: float, intra_cost: float) -> BlockMode:
    """SKIP when every SI vector of the block is identical, else the cheaper mode.

    ``si_qcoeffs`` has one row per SI frame; ties go to MERGE.
    """
    si_qcoeffs = np.atleast_2d(np.asarray(si_qcoeffs))
    if (si_qcoeffs == si_qcoeffs[0]).all():
        return BlockMode.SKIP
    return BlockMode.MERGE if merge_cost <= intra_cost else BlockMode.INTRA


def place_eobs(coded_cost: np.ndarray, y0: np.ndarray, lam: float):
    """RD-optimal EOB of every block.

    ``coded_cost[b, k]`` is the Lagrangian of coding frequency k of block b
    (+inf where it cannot be coded). Truncated frequencies cost Y0(k)^2 and
    the EOB itself costs ue(E + 1) bits. Returns the EOBs (-1 means nothing
    coded) and the minimum costs; ties pick the smaller EOB.
    """
    coded_cost = np.atleast_2d(np.asarray(coded_cost, dtype=np.float64))
    energy = np.atleast_2d(np.asarray(y0, dtype=np.float64)) ** 2
    n, K = coded_cost.shape
    zeros = np.zeros((n, 1))
    with np.errstate(invalid="ignore"):
        prefix = np.concatenate([zeros, np.cumsum(coded_cost, axis=1)], axis=1)
    suffix = np.concatenate([np.cumsum(energy[:, ::-1], axis=1)[:, ::-1], zeros], axis=1)
    total = prefix + suffix + lam * ue_lengths(np.arange(K + 1))[np.newaxis, :]
    best = np.argmin(total, axis=1)
    return best - 1, total[np.arange(n), best]


def place_eob(x0, mode: str = "fixed", *, y0=None, coded_cost=None, lam: float = 0.0) -> int:
    """EOB of one block.

    Fixed mode ends at the last nonzero target q-coeff; optimized mode
    minimizes distortion plus lambda times rate over every position.
    """
    if mode == "fixed":
        return last_nonzero(x0)
    if y0 is None or coded_cost is None:
        raise ConfigurationError("optimized EOB placement needs y0 and coded_cost")
    eobs, _ = place_eobs(np.asarray(coded_cost)[np.newaxis], np.asarray(y0)[np.newaxis], lam)
    return int(eobs[0])


def _last_nonzero_rows(x: np.ndarray) -> np.ndarray:
    nonzero = x != 0
    K = x.shape[1]
    return np.where(nonzero.any(axis=1), K - 1 - np.argmax(nonzero[:, ::-1], axis=1), -1)


# ---------------------------------------------------------------------------
# Fixed-target planning


def _fixed_plans(a: _Analysis, merge: np.ndarray, eobs: np.ndarray) -> list[_FrequencyPlan]:
    plans = []
    for k in range(int(eobs[merge].max(initial=-1)) + 1):
        members = np.flatnonzero(merge & (eobs >= k))
        W = fixed_target_step(a.stats.z_target[members, k].max())
        shifts = np.mod(fixed_target_shift(a.X0[members, k], W), W)
        plans.append(_FrequencyPlan(FrequencyParams(k, W, True, uniform(W)), members, shifts))
    return plans


def _plan_fixed(a: _Analysis):
    """Modes, EOBs and frequency plans reconstructing the target q-coeffs exactly.

    Both modes reproduce the target, so MERGE and INTRA compete on rate.
    SKIP additionally needs the SI q-coeffs to equal the target's.
    """
    skip = (a.stats.z_star == 0).all(axis=1)
    eobs = _last_nonzero_rows(a.X0)
    intra_bits = intra_block_bits(a.X0)
    own_steps = 2 * a.stats.z_target + 2
    merge = ~skip
    for _ in range(FIXED_MODE_PASSES):
        group_steps = np.zeros(a.K, dtype=np.int64)
        for plan in _fixed_plans(a, merge, eobs):
            group_steps[plan.params.k] = plan.params.W
        steps = np.maximum(own_steps, group_steps[np.newaxis, :])
        coded = np.arange(a.K)[np.newaxis, :] <= eobs[:, np.newaxis]
        merge_bits = ue_lengths(eobs + 1) + np.where(coded, np.log2(steps), 0.0).sum(axis=1)
        new_merge = ~skip & (merge_bits <= intra_bits)
        if np.array_equal(new_merge, merge):
            break
        merge = new_merge
    modes = np.where(skip, BlockMode.SKIP, np.where(merge, BlockMode.MERGE, BlockMode.INTRA))
    eobs = np.where(merge, eobs, -1)
    return modes, eobs, _fixed_plans(a, merge, eobs)


# ---------------------------------------------------------------------------
# RD-optimized planning


def _fit_frequency(a: _Analysis, k: int, members, config: CodecConfig, lam: float):
    """Best step size, shift model and shifts for the group at frequency k.

    The optimized model (W = Z* + 1) competes with the fixed-target
    construction on the group's Lagrangian; the cheaper one is kept.
    """
    s = a.stats
    x0, y0 = a.X0[members, k], a.Y0[members, k]
    W = int(s.z_star[members, k].max()) + 1
    problem = ShiftProblem.from_blocks(x0, y0, s.x_min[members, k], s.x_max[members, k], W, a.Q)
    if config.distribution == "naive":
        dist = naive_distribution(problem, lam, config.floor_mass)
    else:
        dist = optimal_distribution(
            problem,
            lam,
            max_spikes=config.max_spikes,
            patience=config.spike_patience,
            full_sweep=config.full_spike_sweep,
            epsilon=config.epsilon,
            floor_mass=config.floor_mass,
        )
    shifts, distortion, rate = problem.select(dist, lam)
    side = distribution_side_bits(dist) + int(ue_lengths(np.array([W - 1]))[0])
    optimized_cost = distortion.sum() + lam * (rate.sum() + side)

    W_fixed = fixed_target_step(s.z_target[members, k].max())
    fixed_distortion = ((y0 - x0 * a.Q) ** 2).sum()
    fixed_side = int(ue_lengths(np.array([W_fixed - 1]))[0])
    fixed_cost = fixed_distortion + lam * (len(members) * math.log2(W_fixed) + fixed_side)

    if fixed_cost < optimized_cost:
        fixed_shifts = np.mod(fixed_target_shift(x0, W_fixed), W_fixed)
        params = FrequencyParams(k, W_fixed, True, uniform(W_fixed))
        return _FrequencyPlan(params, members, fixed_shifts)
    return _FrequencyPlan(FrequencyParams(k, W, False, dist), members, shifts)


def _optimized_plans(a, merge, eobs, config, lam) -> list[_FrequencyPlan]:
    plans = []
    for k in range(int(eobs[merge].max(initial=-1)) + 1):
        members = np.flatnonzero(merge & (eobs >= k))
        plans.append(_fit_frequency(a, k, members, config, lam))
    return plans


def _coded_costs(a: _Analysis, plans, candidates: np.ndarray, lam: float) -> np.ndarray:
    """Lagrangian of coding frequency k of each candidate block under ``plans``"""
    s = a.stats
    cost = np.full((a.n_blocks, a.K), np.inf)
    for plan in plans:
        k, W = plan.params.k, plan.params.W
        if plan.params.fixed:
            ok = candidates[s.z_target[candidates, k] <= W // 2 - 1]
            cost[ok, k] = (a.Y0[ok, k] - a.X0[ok, k] * a.Q) ** 2 + lam * math.log2(W)
            continue
        ok = candidates[s.z_star[candidates, k] < W]
        if len(ok):
            problem = ShiftProblem.from_blocks(
                a.X0[ok, k], a.Y0[ok, k], s.x_min[ok, k], s.x_max[ok, k], W, a.Q
            )
            _, distortion, rate = problem.select(plan.params.dist, lam)
            cost[ok, k] = distortion + lam * rate
    return cost


def _plan_optimized(a: _Analysis, config: CodecConfig, lam: float):
    si = a.X[1:]
    skip = (si == si[0]).all(axis=(0, 2))
    candidates = np.flatnonzero(~skip)
    intra_cost = ((a.Y0 - a.X0 * a.Q) ** 2).sum(axis=1) + lam * intra_block_bits(a.X0)
    merge = ~skip
    eobs = np.where(merge, a.K - 1, -1)
    for rd_pass in range(config.rd_passes):
        plans = _optimized_plans(a, merge, eobs, config, lam)
        coded = _coded_costs(a, plans, candidates, lam)
        new_eobs, merge_cost = place_eobs(coded, a.Y0, lam)
        merge = ~skip & (merge_cost <= intra_cost)
        eobs = np.where(merge, new_eobs, -1)
        logger.debug(
            "RD pass %d: %d merge, %d intra blocks",
            rd_pass + 1, int(merge.sum()), int((~skip & ~merge).sum()),
        )
    modes = np.where(skip, BlockMode.SKIP, np.where(merge, BlockMode.MERGE, BlockMode.INTRA))
    return modes, eobs, _optimized_plans(a, merge, eobs, config, lam)


# ---------------------------------------------------------------------------
# Reconstruction


def _reconstruct_doubled(payload: MFramePayload, x_si: np.ndarray) -> np.ndarray:
    doubled = np.zeros_like(x_si)
    skip = payload.modes == BlockMode.SKIP
    doubled[skip] = 2 * x_si[skip]
    intra = payload.modes == BlockMode.INTRA
    if intra.any():
        doubled[intra] = 2 * payload.intra
    for params, shifts in zip(payload.params, payload.shifts):
        members = payload.members(params.k)
        doubled[members, params.k] = pwc_apply_doubled(x_si[members, params.k], params.W, shifts)
    return doubled


def _si_qcoeffs(header: MFrameHeader, si: Frame) -> np.ndarray:
    if (si.width, si.height) != (header.width, header.height):
        raise DimensionMismatchError(
            f"SI frame is {si.width}x{si.height}, stream is {header.width}x{header.height}"
        )
    return frame_qcoeffs(si, header.block_edge, header.Q, header.scan)


def _to_frame(header: MFrameHeader, coeffs: np.ndarray, frame_id: str) -> Frame:
    pixels = reconstruct_pixels(coeffs, header.width, header.height, header.scan)
    return Frame(pixels, frame_id=frame_id)


def decode_coefficients(stream, any_si: Frame) -> np.ndarray:
    """Reconstructed DCT coefficients of every block, shape (n_blocks, K)"""
    payload = parse(stream).payload
    x_si = _si_qcoeffs(payload.header, any_si)
    return dequantize_doubled(_reconstruct_doubled(payload, x_si), payload.header.Q)


def decode_mframe(stream, any_si: Frame) -> Frame:
    """Decode an M-frame with any one of its SI frames"""
    stream = parse(stream)
    coeffs = decode_coefficients(stream, any_si)
    return _to_frame(stream.header, coeffs, frame_id="mframe")


# ---------------------------------------------------------------------------
# Encoding


def _encode(si_frames, target: Frame, config: CodecConfig, lam: float, requested: str):
    Q = config.quantizer_step
    a = _analyse(target, si_frames, config.block_edge, Q, config.scan)
    if config.mode == "fixed":
        modes, eobs, plans = _plan_fixed(a)
    else:
        modes, eobs, plans = _plan_optimized(a, config, lam)
    header = MFrameHeader(
        target.width,
        target.height,
        config.block_edge,
        config.scan,
        Q,
        config.qp_m,
        len(si_frames),
        config.mode,
        lam,
    )
    payload = MFramePayload(
        header,
        modes.astype(np.int64),
        eobs.astype(np.int64),
        [plan.params for plan in plans],
        [plan.shifts for plan in plans],
        a.X0[modes == BlockMode.INTRA],
    )
    bitstream = MFrameBitstream(write_mframe(payload))
    coeffs = dequantize_doubled(_reconstruct_doubled(payload, a.X[1]), Q)
    distortion = float(((a.Y0 - coeffs) ** 2).sum())
    reconstruction = _to_frame(header, coeffs, frame_id=f"mframe({target.frame_id})")
    return EncodeResult(
        bitstream, reconstruction, distortion, lam, requested, payload.modes, payload.eobs
    )


def encode_mframe(si_frames, target: Frame, config: CodecConfig | None = None) -> EncodeResult:
    """Encode the target so that any one of ``si_frames`` decodes it identically.

    In optimized mode the fixed-target M-frame is built too and the one with
    the lower realized D + lambda * R is returned.
    """
    config = CodecConfig.from_settings() if config is None else config
    si_frames = list(si_frames)
    if not si_frames:
        raise StructuralError("an M-frame needs at least one SI frame")
    if len(si_frames) > MAX_SI:
        raise ConfigurationError(f"at most {MAX_SI} SI frames, got {len(si_frames)}")
    check_same_dimensions(target, *si_frames)
    lam = config.lagrange

    if config.mode == "fixed":
        result = _encode(si_frames, target, config, lam, "fixed")
    else:
        optimized = _encode(si_frames, target, config, lam, "optimized")
        fixed = _encode(si_frames, target, config.replace(mode="fixed"), lam, "optimized")
        result = optimized if optimized.lagrangian <= fixed.lagrangian else fixed

    logger.info(
        "M-frame %s: %s mode (requested %s), %s, D=%.1f R=%d bits",
        target.frame_id or "?",
        result.mode,
        result.requested_mode,
        result.mode_counts(),
        result.distortion,
        result.rate_bits,
    )
    return result


# ---------------------------------------------------------------------------
# Intra-only frames


@dataclass(frozen=True, eq=False)
class IntraResult:
    data: bytes
    reconstruction: Frame
    qp: int

    @property
    def rate_bits(self) -> int:
        return 8 * len(self.data)


def encode_intra_frame(frame: Frame, qp: int, edge: int = 16, scan: str = "zigzag") -> IntraResult:
    """Code a whole frame with the intra block code at quantizer ``qstep(qp)``"""
    Q = qstep(qp)
    qcoeffs = quantize_array(frame_coefficients(frame, edge, scan), Q)
    data = write_intra_frame(frame.width, frame.height, edge, scan, Q, qp, qcoeffs)
    pixels = reconstruct_pixels(qcoeffs * Q, frame.width, frame.height, scan)
    return IntraResult(data, Frame(pixels, frame_id=f"intra({frame.frame_id})"), qp)


def decode_intra_frame(data: bytes) -> Frame:
    width, height, _, scan, Q, _, qcoeffs = read_intra_frame(data)
    return Frame(reconstruct_pixels(qcoeffs * Q, width, height, scan), frame_id="intra")

