"""Adaptive Gauss-Legendre quadrature, batched over families of integrands.

The near-extreme integrals are one-dimensional integrals over (0, 1) after
the CDF substitution, but they are needed at thousands of distance values at
once (curve tables, K-S evaluation grids).  ``integrate_unit`` therefore
refines many independent problems in lock-step: every refinement sweep
evaluates the integrand for all pending panels of all problems in a single
vectorized call, so the Python-level loop depth is bounded by the panel
recursion depth, not by the number of problems.

Each panel's error is estimated by comparing its Gauss-Legendre integral
with the sum over its two halves; a panel is accepted when that difference
is below its proportional share of the tolerance.  Accepted values use the
refined (two-half) estimate, so the recorded error bound is conservative.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericalError

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached per order."""
    if order not in _leggauss_cache:
        _leggauss_cache[order] = np.polynomial.legendre.leggauss(order)
    return _leggauss_cache[order]


def _panel_integrals(f: Integrand, pid: np.ndarray, a: np.ndarray,
                     b: np.ndarray, order: int) -> np.ndarray:
    """Gauss-Legendre integral of f over each panel [a_i, b_i]."""
    x, w = gauss_legendre_nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    u = mid[:, None] + half[:, None] * x[None, :]
    vals = f(u.ravel(), np.repeat(pid, order)).reshape(u.shape)
    return half * (vals @ w)


def integrate_unit(f: Integrand, n_problems: int, *, tol: float = 1e-9,
                   order: int = 15, max_depth: int = 48,
                   initial_panels: int = 8,
                   raise_on_fail: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a family of integrands over (0, 1) adaptively.

    Parameters
    ----------
    f:
        Vectorized integrand ``f(u, idx) -> values`` where ``u`` is a flat
        array of abscissae and ``idx[i]`` tells which problem ``u[i]``
        belongs to.  Nodes are strictly interior to (0, 1).
    n_problems:
        Number of independent integrals (problem indices 0..n_problems-1).
    tol:
        Absolute error target per integral.  Each panel must meet
        ``tol * panel_width`` so accepted errors sum to at most ``tol``.
    initial_panels:
        Uniform subdivision before refinement starts.  Like any adaptive
        scheme, features far narrower than the initial spacing whose mass
        is below tolerance can escape detection; raise this when the
        integrand is known to spike at interior points.

    Returns
    -------
    (values, error_bounds), one entry per problem.

    Raises
    ------
    NumericalError
        If any problem's accumulated error bound exceeds ``tol`` (panels are
        force-accepted at ``max_depth``); the worst achieved error is
        attached.  Suppressed when ``raise_on_fail`` is false.
    """
    k0 = max(1, int(initial_panels))
    edges = np.linspace(0.0, 1.0, k0 + 1)
    pid = np.repeat(np.arange(n_problems, dtype=np.intp), k0)
    a = np.tile(edges[:-1], n_problems)
    b = np.tile(edges[1:], n_problems)
    parent = _panel_integrals(f, pid, a, b, order)

    total = np.zeros(n_problems)
    err_acc = np.zeros(n_problems)
    depth = 0
    while pid.size:
        m = 0.5 * (a + b)
        left = _panel_integrals(f, pid, a, m, order)
        right = _panel_integrals(f, pid, m, b, order)
        refined = left + right
        err = np.abs(parent - refined)
        accept = (err <= tol * (b - a)) | (depth >= max_depth)
        np.add.at(total, pid[accept], refined[accept])
        np.add.at(err_acc, pid[accept], err[accept])
        keep = ~accept
        pid = np.concatenate([pid[keep], pid[keep]])
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        parent = np.concatenate([left[keep], right[keep]])
        depth += 1

    worst = float(err_acc.max()) if n_problems else 0.0
    if raise_on_fail and worst > tol:
        raise NumericalError(
            f"adaptive quadrature did not reach tol={tol:g}; "
            f"achieved error {worst:.3e}", achieved_error=worst)
    return total, err_acc


def composite_gauss_legendre(f: Callable[[np.ndarray], np.ndarray],
                             edges: np.ndarray, order: int = 10) -> float:
    """Fixed composite Gauss-Legendre rule over the panels given by edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre_nodes(order)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    u = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(u.ravel()), dtype=float).reshape(u.shape)
    return float(np.sum(half * (vals @ w)))


def invert_monotone(fn: Callable[[np.ndarray], np.ndarray], targets,
                    lo: float, hi: float, *, tol: float = 1e-9,
                    max_iter: int = 200) -> np.ndarray:
    """Vectorized bisection for a nondecreasing function.

    Returns x with |x - x*| <= tol where fn(x*) = target, assuming
    fn(lo) <= target <= fn(hi) for every target.
    """
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    lo_arr = np.full(t.shape, float(lo))
    hi_arr = np.full(t.shape, float(hi))
    for _ in range(max_iter):
        if float(np.max(hi_arr - lo_arr)) <= tol:
            break
        mid = 0.5 * (lo_arr + hi_arr)
        below = np.asarray(fn(mid)) < t
        lo_arr[below] = mid[below]
        hi_arr[~below] = mid[~below]
    return 0.5 * (lo_arr + hi_arr)
