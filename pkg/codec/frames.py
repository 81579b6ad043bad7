"""Luma frames and raw planar file I/O."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, DimensionMismatchError


@dataclass(frozen=True, eq=False)
class Frame:
    """Rectangular grid of 8-bit luma samples"""

    samples: np.ndarray
    frame_id: str = ""
    width: int = field(init=False)
    height: int = field(init=False)

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 2:
            raise ConfigurationError(
                f"frame samples must be a 2-D grid, got shape {samples.shape}"
            )
        if samples.dtype != np.uint8:
            if samples.size and (samples.min() < 0 or samples.max() > 255):
                raise ConfigurationError("frame samples must lie in [0, 255]")
            samples = samples.astype(np.uint8)
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "height", samples.shape[0])
        object.__setattr__(self, "width", samples.shape[1])

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.samples.shape == other.samples.shape and bool(
            np.array_equal(self.samples, other.samples)
        )

    def __hash__(self):
        return hash((self.samples.shape, self.samples.tobytes()))

    def __str__(self):
        return f"{self.frame_id or 'frame'} {self.width}x{self.height}"

    @property
    def shape(self):
        return self.samples.shape


def check_same_dimensions(*frames: Frame):
    """Raise when the frames do not all share one width and height"""
    if not frames:
        return
    first = frames[0]
    for frame in frames[1:]:
        if frame.shape != first.shape:
            raise DimensionMismatchError(
                f"frame {frame} does not match {first}: "
                f"{frame.width}x{frame.height} vs {first.width}x{first.height}"
            )


def _frame_bytes(width: int, height: int, chroma: str) -> int:
    if chroma == "none":
        return width * height
    if chroma == "420":
        return width * height * 3 // 2
    raise ConfigurationError(f"unknown chroma layout {chroma!r}")


def read_raw(
    path: str | Path,
    width: int,
    height: int,
    frame_index: int = 0,
    chroma: str = "none",
) -> Frame:
    """Read the luma plane of one frame from a planar 8-bit file.

    ``chroma="420"`` skips the U and V planes of a YUV 4:2:0 file; only luma
    is ever coded.
    """
    if width <= 0 or height <= 0:
        raise ConfigurationError("width and height must be positive")
    frame_size = _frame_bytes(width, height, chroma)
    path = Path(path)
    with path.open("rb") as fh:
        fh.seek(frame_index * frame_size)
        data = fh.read(width * height)
    if len(data) != width * height:
        raise OSError(
            f"{path}: expected {width * height} luma bytes for frame "
            f"{frame_index}, found {len(data)}"
        )
    samples = np.frombuffer(data, dtype=np.uint8).reshape(height, width)
    return Frame(samples, frame_id=f"{path.name}#{frame_index}")


def write_raw(path: str | Path, frame: Frame):
    """Write one frame as planar 8-bit grayscale"""
    Path(path).write_bytes(frame.samples.tobytes())
