"""Monte Carlo experiment drivers.

Three demonstrations live here: the slow convergence of block maxima to
their limit law (finite-sample curves vs rescaled limits, with K-S verdicts
for both), the fluctuating-variance return generator sigma_i * eps_i used
to validate the mixture model end to end, and price discretization for the
clumped-minima effect.  Synthetic tick files for throughput/determinism
testing are generated here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import polars as pl

from .distributions import (GENERATOR_ALGORITHM, ParentSpec, cdf, pdf,
                            quantile, sample, spec_to_dict, substream)
from .errors import DomainError, ParameterError
from .evs import (LimitFamily, NormalizingWeights, classify_domain,
                  normalizing_weights, rescaled_limit_cdf,
                  rescaled_limit_density)
from .near_extreme import MixtureModel, mixture_cdf_callable, mixture_quantile_callable
from .pipeline import PipelineConfig, aggregate_near_extreme, block_returns, fit_mixture
from .stats_tests import KSResult, QQPlotData, ks_statistic, qq_data

__all__ = [
    "MaximaExperiment", "maxima_experiment", "model_series",
    "discretization_series", "ClosureRun", "closure_run",
    "write_synthetic_ticks",
]


@dataclass(frozen=True)
class MaximaExperiment:
    """Empirical maxima with the finite-sample and limiting density curves."""

    maxima: np.ndarray
    grid: np.ndarray
    finite_sample_density: np.ndarray
    limiting_density: np.ndarray
    family: LimitFamily
    weights: NormalizingWeights
    ks_finite: KSResult
    ks_limiting: KSResult
    hist_centers: np.ndarray
    hist_density: np.ndarray
    metadata: dict


def maxima_experiment(spec: ParentSpec, set_size: int, samples: int,
                      seed: int, grid_points: int = 512) -> MaximaExperiment:
    """Draw ``samples`` maxima of ``set_size`` iid values and build curves.

    The finite-sample density is N g(x) G(x)^(N-1); the limiting density is
    the rescaled limit law.  Both K-S verdicts (against the finite-sample
    CDF and against the rescaled limiting CDF) are reported: at set sizes in
    the thousands the first is expected to hold while the curves still
    disagree visibly.  Histogram bins follow the Freedman-Diaconis rule.
    """
    if set_size < 2:
        raise DomainError(f"set size must be >= 2, got {set_size}")
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    draws = sample(spec, seed, samples * set_size).reshape(samples, set_size)
    maxima = draws.max(axis=1)

    family = classify_domain(spec)
    weights = normalizing_weights(spec, family, set_size)
    p = np.linspace(1e-4, 1.0 - 1e-6, grid_points)
    grid = np.asarray(quantile(spec, p ** (1.0 / set_size)), dtype=float)
    g = np.asarray(pdf(spec, grid))
    G = np.asarray(cdf(spec, grid))
    finite_density = set_size * g * G ** (set_size - 1)
    limit_density = np.asarray(rescaled_limit_density(family, weights, grid))

    ks_fin = ks_statistic(lambda x: np.asarray(cdf(spec, x)) ** set_size, maxima)
    ks_lim = ks_statistic(lambda x: rescaled_limit_cdf(family, weights, x), maxima)

    hist_density, edges = np.histogram(maxima, bins="fd", density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    meta = {
        "spec": spec_to_dict(spec),
        "set_size": set_size,
        "samples": samples,
        "seed": seed,
        "generator": GENERATOR_ALGORITHM,
        "histogram_rule": "freedman_diaconis",
        "limit_family": type(family).__name__,
        "scale": weights.scale,
        "location": weights.location,
    }
    return MaximaExperiment(
        maxima=maxima, grid=grid, finite_sample_density=finite_density,
        limiting_density=limit_density, family=family, weights=weights,
        ks_finite=ks_fin, ks_limiting=ks_lim,
        hist_centers=centers, hist_density=hist_density, metadata=meta)


def model_series(sigma_path, block_size: int, seed: int,
                 worker: int = 0) -> np.ndarray:
    """Fluctuating-variance returns: block j holds N draws of sigma_j * eps.

    eps is standard normal; sigma is constant within each block (the local
    scale varies slowly enough to be frozen over a block).
    """
    sig = np.asarray(sigma_path, dtype=float)
    if sig.ndim != 1 or sig.size < 1:
        raise ParameterError("sigma path must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(sig)) or np.any(sig <= 0.0):
        raise ParameterError("all sigma path values must be positive")
    if block_size < 1:
        raise DomainError(f"block size must be >= 1, got {block_size}")
    rng = substream(seed, worker)
    eps = rng.standard_normal((sig.size, block_size))
    return (sig[:, None] * eps).ravel()


def discretization_series(prices, tick: float) -> np.ndarray:
    """Round every price to the nearest multiple of the tick size."""
    if not tick > 0.0:
        raise DomainError(f"tick must be positive, got {tick!r}")
    arr = np.asarray(prices, dtype=float)
    return np.rint(arr / tick) * tick


@dataclass(frozen=True)
class ClosureRun:
    """One seeded model-closure run: generator -> pipeline -> fit -> tests."""

    seed: int
    sigma_true: np.ndarray
    mixture: MixtureModel
    ks_max: KSResult
    ks_min: KSResult
    qq_max: QQPlotData
    qq_min: QQPlotData

    @property
    def passed_5pct(self) -> bool:
        return not (self.ks_max.reject_5pct or self.ks_min.reject_5pct)


def closure_run(seed: int, *, block_count: int = 500, block_size: int = 25,
                sigma_lo: float = 0.005, sigma_hi: float = 0.03,
                config: PipelineConfig | None = None) -> ClosureRun:
    """Generate model returns with log-uniform block scales and test closure.

    Block scales are drawn log-uniformly in [sigma_lo, sigma_hi] (one per
    block, constant within it), returns are produced by the fluctuating
    variance generator, then the regular blocking/estimation/aggregation
    path runs and the pooled distances are K-S- and Q-Q-compared against
    the fitted mixture for both the from-max and from-min statistics.
    """
    if not 0.0 < sigma_lo < sigma_hi:
        raise ParameterError("need 0 < sigma_lo < sigma_hi")
    rng = substream(seed, 1)
    sigma_true = np.exp(rng.uniform(math.log(sigma_lo), math.log(sigma_hi),
                                    block_count))
    returns = model_series(sigma_true, block_size, seed)
    blocked = block_returns(returns, block_size, config=config)
    mixture = fit_mixture(blocked)
    cdf_fn = mixture_cdf_callable(mixture)
    quant_fn = mixture_quantile_callable(mixture)
    results = {}
    for mode in ("max", "min"):
        emp = aggregate_near_extreme(blocked, mode)
        results[mode] = (ks_statistic(cdf_fn, emp.distances),
                         qq_data(quant_fn, emp.distances))
    return ClosureRun(seed=seed, sigma_true=sigma_true, mixture=mixture,
                      ks_max=results["max"][0], ks_min=results["min"][0],
                      qq_max=results["max"][1], qq_min=results["min"][1])


def write_synthetic_ticks(path, *, days: int, ticks_per_day: int, seed: int,
                          start_date: str = "2007-01-02", base_price: float = 25.0,
                          tick_size: float = 0.01, spread_ticks: int = 1,
                          change_probability: float = 0.6) -> int:
    """Write a synthetic tick CSV (timestamp,bid,ask,trade_price).

    Mid-prices follow a lazy random walk on the tick grid inside the
    10:00-15:45 session; ``change_probability`` controls what fraction of
    records move the mid (and therefore count as events downstream).
    Returns the number of records written.
    """
    if days < 1 or ticks_per_day < 2:
        raise ParameterError("need days >= 1 and ticks_per_day >= 2")
    rng = substream(seed, 2)
    base_day = np.datetime64(start_date)
    open_ms = (10 * 3600) * 1000
    close_ms = (15 * 3600 + 45 * 60) * 1000
    span = close_ms - open_ms
    step = span / ticks_per_day
    total = 0
    base_level = int(round(base_price / tick_size))
    half = 0.5 * spread_ticks * tick_size
    with open(path, "wb") as fh:
        for day in range(days):
            # evenly spaced with sub-step jitter: nondecreasing by construction
            offsets = (np.arange(ticks_per_day) * step
                       + rng.random(ticks_per_day) * (0.9 * step)).astype(np.int64)
            ts = (base_day + np.timedelta64(day, "D")).astype("datetime64[ms]") \
                + (open_ms + offsets).astype("timedelta64[ms]")
            moves = rng.random(ticks_per_day) < change_probability
            steps = np.where(moves,
                             np.where(rng.random(ticks_per_day) < 0.5, -1, 1), 0)
            steps[0] = 0
            mid = (base_level + np.cumsum(steps)) * tick_size
            bid = mid - half
            ask = mid + half
            trade = np.where(rng.random(ticks_per_day) < 0.5, bid, ask)
            frame = pl.DataFrame({"timestamp": ts, "bid": bid, "ask": ask,
                                  "trade_price": trade}).with_columns(
                pl.col("timestamp").dt.to_string("%Y-%m-%dT%H:%M:%S%.3f"))
            frame.write_csv(fh, include_header=(day == 0), float_precision=4)
            total += ticks_per_day
    return total
