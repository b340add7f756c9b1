"""Goodness-of-fit machinery: one-sample K-S, ECDF, Q-Q data, histograms.

The K-S decision rule follows the scaled-statistic convention: the null is
rejected at 5% when sqrt(n) * D exceeds 1.333 and at 1% when it exceeds
1.625 (Stephens' asymptotic critical values).  The fixed critical values
are applied even when distribution parameters were estimated from the same
sample; that is deliberate methodological fidelity, not an oversight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "KS_CRITICAL_5PCT", "KS_CRITICAL_1PCT", "KSResult", "ks_statistic",
    "EmpiricalCDF", "ecdf", "QQPlotData", "qq_data", "default_qq_grid",
    "Histogram", "histogram",
]

KS_CRITICAL_5PCT = 1.333
KS_CRITICAL_1PCT = 1.625


@dataclass(frozen=True)
class KSResult:
    """Sup-distance D, its sqrt(n)-scaled value, and the two verdicts."""

    distance: float
    sample_size: int
    scaled: float
    reject_5pct: bool
    reject_1pct: bool

    @classmethod
    def from_distance(cls, distance: float, sample_size: int) -> "KSResult":
        scaled = math.sqrt(sample_size) * distance
        return cls(distance=float(distance), sample_size=int(sample_size),
                   scaled=scaled,
                   reject_5pct=scaled > KS_CRITICAL_5PCT,
                   reject_1pct=scaled > KS_CRITICAL_1PCT)

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "sample_size": self.sample_size,
            "scaled": self.scaled,
            "reject_5pct": self.reject_5pct,
            "reject_1pct": self.reject_1pct,
            "critical_5pct": KS_CRITICAL_5PCT,
            "critical_1pct": KS_CRITICAL_1PCT,
        }


def ks_statistic(theoretical_cdf: Callable[[np.ndarray], np.ndarray],
                 sample: Sequence[float]) -> KSResult:
    """One-sample K-S statistic of a sample against a continuous CDF.

    The sup distance is evaluated on both sides of every ECDF jump, which
    is exact for a step ECDF against a continuous CDF.
    """
    values = np.sort(np.asarray(sample, dtype=float))
    n = values.size
    if n == 0:
        raise DomainError("K-S statistic needs a non-empty sample")
    F = np.asarray(theoretical_cdf(values), dtype=float)
    steps = np.arange(1, n + 1, dtype=float) / n
    d = max(float(np.max(np.abs(F - steps))),
            float(np.max(np.abs(F - (steps - 1.0 / n)))))
    return KSResult.from_distance(d, n)


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous step function of a sample; callable on scalars/arrays."""

    sorted_values: np.ndarray

    def __call__(self, r):
        idx = np.searchsorted(self.sorted_values, r, side="right")
        out = idx / self.sorted_values.size
        return float(out) if np.ndim(r) == 0 else out


def ecdf(sample: Sequence[float]) -> EmpiricalCDF:
    values = np.sort(np.asarray(sample, dtype=float))
    if values.size == 0:
        raise DomainError("ECDF needs a non-empty sample")
    return EmpiricalCDF(sorted_values=values)


def default_qq_grid() -> np.ndarray:
    """Probabilities 0, 0.02, ..., 0.98 (50 points)."""
    return np.arange(50) * 0.02


@dataclass(frozen=True)
class QQPlotData:
    probabilities: np.ndarray
    theoretical_q: np.ndarray
    empirical_q: np.ndarray

    def to_dict(self) -> dict:
        return {
            "probabilities": [float(p) for p in self.probabilities],
            "theoretical_q": [float(q) for q in self.theoretical_q],
            "empirical_q": [float(q) for q in self.empirical_q],
        }


def qq_data(theoretical_quantile: Callable[[np.ndarray], np.ndarray],
            sample: Sequence[float],
            probabilities: np.ndarray | None = None) -> QQPlotData:
    """Quantile pairs on a probability grid.

    Empirical quantiles are order statistics at index ceil(p * n), with
    p = 0 mapping to the sample minimum.
    """
    probs = default_qq_grid() if probabilities is None else \
        np.asarray(probabilities, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise DomainError("probability grid must be a non-empty 1-D array")
    if np.any(probs < 0.0) or np.any(probs >= 1.0):
        raise DomainError("probability grid values must lie in [0, 1)")
    if np.any(np.diff(probs) <= 0.0):
        raise DomainError("probability grid must be strictly increasing")
    values = np.sort(np.asarray(sample, dtype=float))
    n = values.size
    if n == 0:
        raise DomainError("Q-Q data needs a non-empty sample")
    ranks = np.maximum(np.ceil(probs * n).astype(int), 1)
    empirical = values[ranks - 1]
    theoretical = np.asarray(theoretical_quantile(probs), dtype=float)
    return QQPlotData(probabilities=probs, theoretical_q=theoretical,
                      empirical_q=empirical)


@dataclass(frozen=True)
class Histogram:
    """Density-normalized histogram on bins anchored at a fixed origin."""

    centers: np.ndarray
    densities: np.ndarray
    bin_width: float
    origin: float
    sample_size: int


def histogram(values: Sequence[float], bin_width: float,
              origin: float = 0.0) -> Histogram:
    """Histogram with bins [origin + k*w, origin + (k+1)*w), density-normalized."""
    if not bin_width > 0.0:
        raise DomainError(f"bin width must be positive, got {bin_width!r}")
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return Histogram(centers=np.empty(0), densities=np.empty(0),
                         bin_width=float(bin_width), origin=float(origin),
                         sample_size=0)
    k = np.floor((arr - origin) / bin_width).astype(np.int64)
    k0 = int(k.min())
    counts = np.bincount(k - k0)
    centers = origin + (k0 + np.arange(counts.size) + 0.5) * bin_width
    densities = counts / (arr.size * bin_width)
    return Histogram(centers=centers, densities=densities,
                     bin_width=float(bin_width), origin=float(origin),
                     sample_size=int(arr.size))
