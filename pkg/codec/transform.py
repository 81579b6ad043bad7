"""Block partitioning, orthonormal DCT and uniform scalar quantization.

Everything here maps pixel blocks to the integer q-coeff domain where merging
happens, and back. The frame-level helpers are the ones the codec uses: the
encoder and the decoder both go through :func:`frame_coefficients` and
:func:`reconstruct_pixels`, so identical inputs give bit-identical floats on
both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dctn, idctn

from .exceptions import ConfigurationError, StructuralError
from .frames import Frame

VALID_EDGES = (4, 8, 16)
SCANS = ("zigzag", "raster")
# H.264 QP range
MAX_QP = 51


@dataclass(frozen=True)
class CoeffBlock:
    """Real DCT coefficients of one block, in scan order"""

    coeffs: np.ndarray
    block_index: int = 0

    @property
    def K(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class QCoeffBlock:
    """Quantized coefficients X(k) = round(Y(k)/Q) of one block"""

    qcoeffs: np.ndarray
    quantizer_step: float
    block_index: int = 0

    @property
    def K(self):
        return len(self.qcoeffs)


def check_edge(edge: int):
    if edge not in VALID_EDGES:
        raise ConfigurationError(
            f"block edge must be one of {VALID_EDGES}, got {edge}"
        )


def check_scan(scan: str):
    if scan not in SCANS:
        raise ConfigurationError(f"scan must be one of {SCANS}, got {scan!r}")


def qstep(qp: float) -> float:
    """Quantizer step for a QP, doubling every 6 steps; QP 4 is step 1"""
    return float(2.0 ** ((qp - 4) / 6.0))


def round_half_away(values):
    """Round to nearest integer, ties away from zero"""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


@lru_cache(maxsize=None)
def scan_order(edge: int, scan: str = "zigzag") -> np.ndarray:
    """Raster positions of a block listed in scan order.

    Zig-zag follows the JPEG convention generalised to any edge: odd
    anti-diagonals run top to bottom, even ones bottom to top.
    """
    check_edge(edge)
    check_scan(scan)
    if scan == "raster":
        order = np.arange(edge * edge)
    else:
        cells = [(r, c) for r in range(edge) for c in range(edge)]
        cells.sort(key=lambda rc: (rc[0] + rc[1], rc[0] if (rc[0] + rc[1]) % 2 else -rc[0]))
        order = np.array([r * edge + c for r, c in cells])
    order.setflags(write=False)
    return order


def partition(frame: Frame, edge: int) -> np.ndarray:
    """Split a frame into square blocks in raster order.

    Returns an array of shape (n_blocks, edge, edge); block b covers rows
    ``(b // bw) * edge`` onward and columns ``(b % bw) * edge`` onward, where
    ``bw = width // edge``.
    """
    check_edge(edge)
    if frame.width % edge:
        raise ConfigurationError(
            f"frame width {frame.width} is not a multiple of block edge {edge}"
        )
    if frame.height % edge:
        raise ConfigurationError(
            f"frame height {frame.height} is not a multiple of block edge {edge}"
        )
    return _split(frame.samples, edge)


def _split(samples: np.ndarray, edge: int) -> np.ndarray:
    height, width = samples.shape
    bh, bw = height // edge, width // edge
    return (
        samples.reshape(bh, edge, bw, edge)
        .transpose(0, 2, 1, 3)
        .reshape(bh * bw, edge, edge)
    )


def assemble(blocks: np.ndarray, width: int, height: int) -> np.ndarray:
    """Inverse of :func:`partition`"""
    edge = blocks.shape[-1]
    bh, bw = height // edge, width // edge
    return (
        blocks.reshape(bh, bw, edge, edge).transpose(0, 2, 1, 3).reshape(height, width)
    )


def _to_scan(blocks: np.ndarray, scan: str) -> np.ndarray:
    edge = blocks.shape[-1]
    flat = blocks.reshape(blocks.shape[0], edge * edge)
    return flat[:, scan_order(edge, scan)]


def _from_scan(coeffs: np.ndarray, edge: int, scan: str) -> np.ndarray:
    flat = np.empty_like(coeffs)
    flat[:, scan_order(edge, scan)] = coeffs
    return flat.reshape(coeffs.shape[0], edge, edge)


def forward_dct(block, scan: str = "zigzag", block_index: int = 0) -> CoeffBlock:
    """Orthonormal 2-D DCT-II of one square block, serialized in scan order"""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise StructuralError(f"expected a square block, got shape {block.shape}")
    coeffs = dctn(block[np.newaxis], type=2, norm="ortho", axes=(-2, -1))
    return CoeffBlock(_to_scan(coeffs, scan)[0], block_index)


def inverse_dct(coeffs: CoeffBlock, scan: str = "zigzag") -> np.ndarray:
    """Real-valued pixel block (before rounding and clipping)"""
    values = np.asarray(coeffs.coeffs, dtype=np.float64)
    edge = int(round(np.sqrt(len(values))))
    if edge * edge != len(values):
        raise StructuralError(f"{len(values)} coefficients do not form a square block")
    block = _from_scan(values[np.newaxis], edge, scan)
    return idctn(block, type=2, norm="ortho", axes=(-2, -1))[0]


def quantize(coeffs: CoeffBlock, Q: float) -> QCoeffBlock:
    if Q <= 0:
        raise ConfigurationError(f"quantizer step must be positive, got {Q}")
    x = round_half_away(np.asarray(coeffs.coeffs) / Q).astype(np.int64)
    return QCoeffBlock(x, float(Q), coeffs.block_index)


def dequantize(q: QCoeffBlock) -> CoeffBlock:
    return CoeffBlock(np.asarray(q.qcoeffs, dtype=np.float64) * q.quantizer_step, q.block_index)


# ---------------------------------------------------------------------------
# Frame-level helpers


def frame_coefficients(frame: Frame, edge: int, scan: str = "zigzag") -> np.ndarray:
    """DCT coefficients of every block, shape (n_blocks, K), scan order"""
    blocks = partition(frame, edge).astype(np.float64)
    coeffs = dctn(blocks, type=2, norm="ortho", axes=(-2, -1))
    return _to_scan(coeffs, scan)


def quantize_array(coeffs: np.ndarray, Q: float) -> np.ndarray:
    if Q <= 0:
        raise ConfigurationError(f"quantizer step must be positive, got {Q}")
    return round_half_away(coeffs / Q).astype(np.int64)


def frame_qcoeffs(frame: Frame, edge: int, Q: float, scan: str = "zigzag") -> np.ndarray:
    """Quantized coefficients of every block, shape (n_blocks, K)"""
    return quantize_array(frame_coefficients(frame, edge, scan), Q)


def reconstruct_pixels(
    coeffs: np.ndarray, width: int, height: int, scan: str = "zigzag"
) -> np.ndarray:
    """Inverse transform, round half away from zero and clip to 8 bits"""
    edge = int(round(np.sqrt(coeffs.shape[1])))
    blocks = idctn(_from_scan(coeffs, edge, scan), type=2, norm="ortho", axes=(-2, -1))
    pixels = np.clip(round_half_away(blocks), 0, 255).astype(np.uint8)
    return assemble(pixels, width, height)


def intra_reconstruct(frame: Frame, Q: float, edge: int, scan: str = "zigzag") -> Frame:
    """Decode of the frame quantized at step Q with no truncation"""
    coeffs = frame_qcoeffs(frame, edge, Q, scan) * Q
    pixels = reconstruct_pixels(coeffs, frame.width, frame.height, scan)
    return Frame(pixels, frame_id=f"{frame.frame_id}@Q{Q:g}")
