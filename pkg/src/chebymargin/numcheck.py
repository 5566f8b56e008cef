"""Finite-difference and grid-scan oracles.

Independent of the analytic code paths they validate: everything here is
built from function evaluations only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cheby_core

# Central-difference defaults balancing truncation against round-off in
# 64-bit arithmetic.
DEFAULT_GRAD_STEP = 1e-5
DEFAULT_HESS_STEP = 1e-4


@dataclass
class ScanReport:
    """Uniform-grid samples of a scalar function with max-magnitude summary."""

    grid: np.ndarray
    values: np.ndarray
    max_abs: float
    argmax: float


def finite_diff_grad(f, x: float, h: float = DEFAULT_GRAD_STEP) -> float:
    """Central difference quotient ``(f(x+h) - f(x-h)) / 2h``."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    return (f(x + h) - f(x - h)) / (2.0 * h)


def scan(f, lo: float, hi: float, n: int) -> ScanReport:
    """Sample ``f`` on ``n`` uniform points of [lo, hi], endpoints included.

    ``f`` may be vectorized over an ndarray; if it is not, it is called
    once per grid point.  Identical inputs produce bit-identical reports.
    """
    if lo >= hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if n < 2:
        raise ValueError(f"need at least 2 grid points, got {n}")
    grid = np.linspace(lo, hi, n)
    try:
        values = np.asarray(f(grid), dtype=float)
        if values.shape != grid.shape:
            raise TypeError
    except (TypeError, ValueError):
        values = np.array([float(f(x)) for x in grid])
    idx = int(np.argmax(np.abs(values)))
    return ScanReport(
        grid=grid,
        values=values,
        max_abs=float(np.abs(values[idx])),
        argmax=float(grid[idx]),
    )


def max_abs_error(margin: float, degree: int, n: int = 100001) -> float:
    """Grid sup-norm distance between the exact transform and its series."""
    if n < 2:
        raise ValueError(f"need at least 2 grid points, got {n}")
    series = cheby_core.coefficients(margin, degree)
    grid = np.linspace(-1.0, 1.0, n)
    exact = cheby_core.exact_psi(grid, margin)
    approx = cheby_core.clenshaw_eval(series, grid)
    return float(np.max(np.abs(exact - approx)))
