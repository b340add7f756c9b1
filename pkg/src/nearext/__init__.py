"""Extreme-value and near-extreme statistics for intraday log-returns.

The package combines classical block-maxima theory (finite-sample law,
Weibull/Frechet/Gumbel limits, normalizing weights) with the distribution
of distances from a set's maximum, and applies both to an event-time
tick-data pipeline that validates a Gaussian-mixture model of intraday
returns via K-S tests and Q-Q plots.
"""

__version__ = "0.1.0"

from .distributions import (Gaussian, ParentSpec, QExponential, Uniform, cdf,
                            pdf, quantile, sample)
from .errors import (ClassificationError, DataError, DomainError,
                     NumericalError, ParameterError)
from .evs import (DegenerateLimit, FrechetLimit, GumbelLimit, LimitFamily,
                  NormalizingWeights, WeibullLimit, classify_domain,
                  finite_sample_max_cdf, limiting_cdf, normalizing_weights,
                  rescaled_limit_density)
from .near_extreme import (EmpiricalNearExtreme, MixtureModel,
                           empirical_near_extreme, exact_cdf, exact_density,
                           mixture_cdf, mixture_density, mixture_quantile)
from .pipeline import (BlockedReturns, EventSeries, PipelineConfig,
                       TickRecord, aggregate_near_extreme, block_returns,
                       build_event_series, compute_returns, filter_ticks,
                       fit_mixture)
from .stats_tests import (KSResult, QQPlotData, ecdf, histogram, ks_statistic,
                          qq_data)
from .synthetic import (closure_run, discretization_series, maxima_experiment,
                        model_series)

__all__ = [name for name in dir() if not name.startswith("_")]
