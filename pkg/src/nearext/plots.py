"""Figure rendering for the report path.

All plotting goes through the Agg backend and writes PNG files next to the
delimited artifacts; nothing here opens a window.  The renderers read the
CSV artifacts back rather than taking in-memory objects, so report figures
can be produced long after a pipeline run, from its directory alone.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["render_fit_figure", "render_qq_figure", "render_histogram_figure",
           "render_maxima_figure"]

_DPI = 150


def _read_columns(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def render_fit_figure(distances_csv, mixture_csv, out_png, title: str = "") -> Path:
    """Empirical distance CDF (dots) against the mixture CDF (line)."""
    sample = np.sort(_read_columns(distances_csv)["r"])
    curve = _read_columns(mixture_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n = sample.size
    if n:
        thin = max(1, n // 400)
        ax.plot(sample[::thin], (np.arange(1, n + 1) / n)[::thin], ".",
                ms=3, color="#1f77b4", label="empirical")
    ax.plot(curve["r"], curve["cdf"], "-", color="black", lw=1.2, label="mixture")
    ax.set_xlabel("distance from extreme")
    ax.set_ylabel("cumulative probability")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return Path(out_png)


def render_qq_figure(qq_csv, out_png, title: str = "") -> Path:
    qq = _read_columns(qq_csv)
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    ax.plot(qq["theoretical_q"], qq["empirical_q"], "o", ms=4, color="#d62728")
    lim = max(float(np.max(qq["theoretical_q"])), float(np.max(qq["empirical_q"]))) \
        if qq["theoretical_q"].size else 1.0
    ax.plot([0, lim], [0, lim], "-", color="gray", lw=1.0)
    ax.set_xlabel("theoretical quantile")
    ax.set_ylabel("empirical quantile")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return Path(out_png)


def render_histogram_figure(histogram_csv, out_png, title: str = "") -> Path:
    hist = _read_columns(histogram_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if hist["bin_center"].size:
        width = float(hist["bin_center"][1] - hist["bin_center"][0]) \
            if hist["bin_center"].size > 1 else 1.0
        ax.bar(hist["bin_center"], hist["density"], width=width,
               color="#2ca02c", alpha=0.7)
    ax.set_xlabel("distance from extreme")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return Path(out_png)


def render_maxima_figure(curves_csv, histogram_csv, out_png, title: str = "") -> Path:
    """Maxima histogram with finite-sample and limiting density curves."""
    curves = _read_columns(curves_csv)
    hist = _read_columns(histogram_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if hist["bin_center"].size:
        width = float(hist["bin_center"][1] - hist["bin_center"][0]) \
            if hist["bin_center"].size > 1 else 1.0
        ax.bar(hist["bin_center"], hist["density"], width=width,
               color="#9ecae1", label="empirical maxima")
    ax.plot(curves["x"], curves["finite_sample_density"], "--", color="black",
            lw=1.4, label="finite sample")
    ax.plot(curves["x"], curves["limiting_density"], "-", color="black",
            lw=1.2, label="limiting")
    ax.set_xlabel("maximum")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return Path(out_png)
