"""Classical extreme-value statistics for block maxima.

Finite-sample law of the maximum of N iid draws, the three limit families
(Weibull for bounded supports, Frechet for power-law tails, Gumbel for
exponential-or-faster tails), the normalizing scale/location weights that
connect them, and domain-of-attraction classification for the supported
parents.

For parents with continuous, strictly increasing CDFs the inf/sup sets
defining the weights collapse to plain quantile evaluations, which is how
they are computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .distributions import (Gaussian, ParentSpec, QExponential, Uniform,
                            cdf, quantile, support)
from .errors import ClassificationError, DomainError, ParameterError

__all__ = [
    "WeibullLimit", "FrechetLimit", "GumbelLimit", "DegenerateLimit",
    "LimitFamily", "NormalizingWeights",
    "finite_sample_max_cdf", "limiting_cdf", "limiting_pdf",
    "normalizing_weights", "classify_domain",
    "rescaled_limit_density", "rescaled_limit_cdf", "sup_cdf_distance",
]


@dataclass(frozen=True)
class WeibullLimit:
    """Limit law exp(-(-x)^beta) on x <= 0, for bounded supports."""

    beta: float

    def __post_init__(self):
        if not (self.beta >= 1.0):
            raise ParameterError(f"Weibull exponent must be >= 1, got {self.beta!r}")


@dataclass(frozen=True)
class FrechetLimit:
    """Limit law exp(-x^(-alpha)) on x > 0, for power-law tails."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ParameterError(f"Frechet exponent must be > 0, got {self.alpha!r}")


@dataclass(frozen=True)
class GumbelLimit:
    """Limit law exp(-exp(-x)), for exponential-or-faster unbounded tails."""


@dataclass(frozen=True)
class DegenerateLimit:
    """Point mass at the support supremum w.

    Arises for bounded parents approaching their endpoint with exponent
    below one; none of the supported parents produce it.
    """

    w: float


LimitFamily = Union[WeibullLimit, FrechetLimit, GumbelLimit, DegenerateLimit]


@dataclass(frozen=True)
class NormalizingWeights:
    """Scale a_N > 0 and location b_N rescaling maxima of sets of size N."""

    scale: float
    location: float
    set_size: int

    def __post_init__(self):
        if not (self.scale > 0.0):
            raise ParameterError(f"normalizing scale must be positive, got {self.scale!r}")

    def rescale(self, x):
        """Map raw coordinates to the limit law's coordinates."""
        return (np.asarray(x, dtype=float) - self.location) / self.scale


def finite_sample_max_cdf(spec: ParentSpec, set_size: int, x):
    """CDF of the maximum of ``set_size`` iid draws: G(x)^N."""
    if set_size < 1:
        raise DomainError(f"set size must be >= 1, got {set_size}")
    g = np.asarray(cdf(spec, x), dtype=float)
    out = g ** set_size
    return float(out[()]) if out.ndim == 0 else out


def limiting_cdf(family: LimitFamily, x):
    """Evaluate the limit law L(x)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if isinstance(family, WeibullLimit):
        out = np.ones_like(arr)
        neg = arr <= 0.0
        out[neg] = np.exp(-((-arr[neg]) ** family.beta))
    elif isinstance(family, FrechetLimit):
        out = np.zeros_like(arr)
        pos = arr > 0.0
        out[pos] = np.exp(-(arr[pos] ** (-family.alpha)))
    elif isinstance(family, GumbelLimit):
        with np.errstate(over="ignore"):
            out = np.exp(-np.exp(-arr))
    elif isinstance(family, DegenerateLimit):
        out = (arr >= family.w).astype(float)
    else:
        raise ParameterError(f"unknown limit family {family!r}")
    return float(out[0]) if scalar else out


def limiting_pdf(family: LimitFamily, x):
    """Density of the limit law (infinite spike at w for the degenerate case)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if isinstance(family, WeibullLimit):
        out = np.zeros_like(arr)
        neg = arr <= 0.0
        z = -arr[neg]
        out[neg] = family.beta * z ** (family.beta - 1.0) * np.exp(-(z ** family.beta))
    elif isinstance(family, FrechetLimit):
        out = np.zeros_like(arr)
        pos = arr > 0.0
        z = arr[pos]
        out[pos] = family.alpha * z ** (-family.alpha - 1.0) * np.exp(-(z ** (-family.alpha)))
    elif isinstance(family, GumbelLimit):
        with np.errstate(over="ignore"):
            out = np.exp(-arr - np.exp(-arr))
    elif isinstance(family, DegenerateLimit):
        out = np.where(arr == family.w, np.inf, 0.0)
    else:
        raise ParameterError(f"unknown limit family {family!r}")
    return float(out[0]) if scalar else out


def classify_domain(spec: ParentSpec) -> LimitFamily:
    """Domain of attraction of the parent's maxima.

    Gaussian tails decay faster than exponentially -> Gumbel; the
    q-exponential has a power tail with index 1/(q-1) -> Frechet with that
    exponent; the uniform reaches its bounded endpoint linearly -> Weibull
    with exponent 1.
    """
    if isinstance(spec, Gaussian):
        return GumbelLimit()
    if isinstance(spec, QExponential):
        return FrechetLimit(alpha=spec.tail_index)
    if isinstance(spec, Uniform):
        return WeibullLimit(beta=1.0)
    raise ParameterError(f"unknown parent spec {spec!r}")


def _check_family(spec: ParentSpec, family: LimitFamily) -> None:
    expected = classify_domain(spec)
    if type(family) is not type(expected):
        raise ClassificationError(
            f"{type(family).__name__} does not match the domain of attraction "
            f"of {spec!r} ({type(expected).__name__})")
    for attr in ("alpha", "beta"):
        if hasattr(expected, attr):
            want = getattr(expected, attr)
            got = getattr(family, attr)
            if not math.isclose(want, got, rel_tol=1e-9, abs_tol=0.0):
                raise ClassificationError(
                    f"{type(family).__name__}.{attr}={got!r} does not match "
                    f"the classified value {want!r} for {spec!r}")


def normalizing_weights(spec: ParentSpec, family: LimitFamily,
                        set_size: int) -> NormalizingWeights:
    """Scale/location weights for maxima of sets of ``set_size`` draws.

    Weibull: location is the support supremum, scale its distance to the
    (1 - 1/N) quantile.  Frechet: scale is the (1 - 1/N) quantile, location
    zero.  Gumbel: location is the (1 - 1/N) quantile, scale the gap up to
    the (1 - 1/(N e)) quantile.
    """
    if set_size < 2:
        raise DomainError(f"set size must be >= 2 for weights, got {set_size}")
    _check_family(spec, family)
    n = float(set_size)
    if isinstance(family, WeibullLimit):
        location = support(spec)[1]
        scale = location - float(quantile(spec, 1.0 - 1.0 / n))
    elif isinstance(family, FrechetLimit):
        scale = float(quantile(spec, 1.0 - 1.0 / n))
        location = 0.0
    elif isinstance(family, GumbelLimit):
        location = float(quantile(spec, 1.0 - 1.0 / n))
        scale = float(quantile(spec, 1.0 - 1.0 / (n * math.e))) - location
    else:
        raise ClassificationError(
            "degenerate limits have no normalizing weights for the supported parents")
    return NormalizingWeights(scale=scale, location=location, set_size=set_size)


def rescaled_limit_density(family: LimitFamily, weights: NormalizingWeights, x):
    """Density of the limit law mapped back to raw coordinates: L'((x-b)/a)/a."""
    z = weights.rescale(x)
    out = np.asarray(limiting_pdf(family, z), dtype=float) / weights.scale
    return float(out[()]) if np.ndim(x) == 0 else out


def rescaled_limit_cdf(family: LimitFamily, weights: NormalizingWeights, x):
    """Limit-law CDF in raw coordinates: L((x-b)/a)."""
    return limiting_cdf(family, weights.rescale(x))


def sup_cdf_distance(spec: ParentSpec, set_size: int, *,
                     grid_size: int = 10_000, p_lo: float = 1e-6,
                     p_hi: float = 1.0 - 1e-6) -> float:
    """Sup distance between G(a x + b)^N and its limit law on a finite grid.

    The grid spans quantiles [p_lo, p_hi] of the finite-sample maximum; on
    it G(a x + b)^N equals the grid probability exactly, so only the limit
    law needs evaluating.  A computable surrogate for the weak-convergence
    statement.
    """
    family = classify_domain(spec)
    w = normalizing_weights(spec, family, set_size)
    p = np.linspace(p_lo, p_hi, grid_size)
    x_raw = np.asarray(quantile(spec, p ** (1.0 / set_size)), dtype=float)
    return float(np.max(np.abs(p - limiting_cdf(family, w.rescale(x_raw)))))
