"""SVG plots of RD curves."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

MARKERS = "osD^v<>"


def plot_curves(curves, path, title: str = "PSNR vs rate"):
    """Write one PSNR-vs-kbit line per curve to an SVG file"""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        for i, curve in enumerate(curves):
            points = [p for p in curve.points if not math.isinf(p.psnr_db)]
            ax.plot(
                [p.rate_bits / 1000 for p in points],
                [p.psnr_db for p in points],
                marker=MARKERS[i % len(MARKERS)],
                label=curve.method,
            )
        ax.set_xlabel("rate (kbit per frame)")
        ax.set_ylabel("PSNR (dB)")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.savefig(path, format="svg", bbox_inches="tight")
    finally:
        plt.close(fig)
    return path
