"""Seeded synthetic target pictures.

A picture is a smooth band-limited texture plus a few flat rectangles with
sharp edges, so most high-frequency q-coeffs of a block are zero.
"""

from __future__ import annotations

import numpy as np

from codec.frames import Frame

N_WAVES = 6
MAX_CYCLES = 3.0


def synthetic_frame(width: int, height: int, seed, n_edges: int = 2) -> Frame:
    """Deterministic test picture for ``seed`` (an int or a sequence of ints)"""
    rng = np.random.default_rng(seed)
    rows = np.arange(height)[:, np.newaxis]
    cols = np.arange(width)[np.newaxis, :]
    texture = np.zeros((height, width))
    for _ in range(N_WAVES):
        fy, fx = rng.uniform(0, MAX_CYCLES, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        amplitude = rng.uniform(6, 20)
        texture += amplitude * np.cos(2 * np.pi * (fy * rows / height + fx * cols / width) + phase)
    pixels = 128 + texture
    for _ in range(n_edges):
        top, bottom = np.sort(rng.integers(0, height, size=2))
        left, right = np.sort(rng.integers(0, width, size=2))
        pixels[top : bottom + 1, left : right + 1] += rng.choice([-1, 1]) * rng.uniform(30, 60)
    pixels = np.clip(np.floor(pixels + 0.5), 0, 255).astype(np.uint8)
    return Frame(pixels, frame_id=f"synthetic-{_label(seed)}")


def translate(frame: Frame, dy: int, dx: int) -> Frame:
    """Shift content by (dy, dx) pixels, replicating the border"""
    pad = max(abs(dy), abs(dx))
    padded = np.pad(frame.samples, pad, mode="edge")
    top, left = pad - dy, pad - dx
    samples = padded[top : top + frame.height, left : left + frame.width]
    return Frame(samples, frame_id=f"{frame.frame_id}+({dy},{dx})")


def _label(seed) -> str:
    if np.ndim(seed):
        return "-".join(str(int(s)) for s in seed)
    return str(seed)
