"""Chebyshev-series machinery for the angular margin transform.

The target-logit transform of additive-angular-margin softmax is
``psi(x, m) = cos(arccos(x) + m)`` for a cosine ``x`` and margin ``m``.
This module builds its truncated Chebyshev expansion

    f(x, m) = sum_{k=0..n} a_k T_k(x)

with closed-form coefficients, evaluates it with Clenshaw's recurrence,
and provides the analytic first and second derivatives of the truncated
series together with a grid Lipschitz constant and a uniform error bound.

All functions are pure and accept either a scalar or an ndarray for the
evaluation point; arrays are processed elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Margin transform derivatives explode near the domain edge; inputs that sit
# exactly on |x| = 1 are evaluated at 1 - COS_EDGE_EPS instead.
COS_EDGE_EPS = 1e-7

# Switch point between the closed trig form of the series Hessian and the
# polynomial recurrence form, which stays well conditioned at the endpoints.
HESSIAN_ENDPOINT_SWITCH = 1e-6


@dataclass
class ChebyshevSeries:
    """Truncated Chebyshev expansion of the margin transform.

    Attributes
    ----------
    margin : float
        Angular margin in radians, in ``[0, pi/2)``.
    degree : int
        Highest coefficient index ``n``; the series holds ``n + 1``
        coefficients ``a_0 .. a_n``.
    coefficients : ndarray
        The coefficients, ``coefficients[k] == a_k``.
    """

    margin: float
    degree: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.degree + 1,):
            raise ValueError(
                f"series of degree {self.degree} needs {self.degree + 1} "
                f"coefficients, got shape {self.coefficients.shape}"
            )


def _validate_eval_point(x) -> tuple[np.ndarray, bool]:
    """Return ``x`` as a float array, rejecting anything outside [-1, 1]."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.abs(arr) <= 1.0):
        raise ValueError("evaluation point must satisfy |x| <= 1")
    return arr, arr.ndim == 0


def _maybe_scalar(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def coefficients(margin: float, degree: int) -> ChebyshevSeries:
    """Closed-form Chebyshev coefficients of ``cos(arccos(x) + margin)``.

    The constant term is ``a_0 = -2 sin(m) / pi``, the linear term is
    ``a_1 = cos(m)``, all odd coefficients above 1 vanish, and the even
    coefficients are ``a_{2k} = (2 sin(m)/pi) (1/(2k-1) - 1/(2k+1))``.

    Parameters
    ----------
    margin : float
        Angular margin in radians, ``0 <= margin < pi/2``.
    degree : int
        Highest coefficient index, at least 1.

    Returns
    -------
    ChebyshevSeries
    """
    if not 0.0 <= margin < math.pi / 2:
        raise ValueError(f"margin must be in [0, pi/2), got {margin}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    sin_m = math.sin(margin)
    a = np.zeros(degree + 1)
    a[0] = -2.0 * sin_m / math.pi
    a[1] = math.cos(margin)
    for k in range(1, degree // 2 + 1):
        a[2 * k] = (2.0 * sin_m / math.pi) * (1.0 / (2 * k - 1) - 1.0 / (2 * k + 1))
    return ChebyshevSeries(margin=margin, degree=degree, coefficients=a)


def cheb_T(k: int, x):
    """Chebyshev polynomial of the first kind via the three-term recurrence."""
    if k < 0:
        raise ValueError("polynomial index must be non-negative")
    arr, scalar = _validate_eval_point(x)
    t_prev = np.ones_like(arr)
    if k == 0:
        return _maybe_scalar(t_prev, scalar)
    t_cur = arr.copy()
    for _ in range(k - 1):
        t_prev, t_cur = t_cur, 2.0 * arr * t_cur - t_prev
    return _maybe_scalar(t_cur, scalar)


def cheb_U(k: int, x):
    """Chebyshev polynomial of the second kind via the three-term recurrence."""
    if k < 0:
        raise ValueError("polynomial index must be non-negative")
    arr, scalar = _validate_eval_point(x)
    u_prev = np.ones_like(arr)
    if k == 0:
        return _maybe_scalar(u_prev, scalar)
    u_cur = 2.0 * arr
    for _ in range(k - 1):
        u_prev, u_cur = u_cur, 2.0 * arr * u_cur - u_prev
    return _maybe_scalar(u_cur, scalar)


def _clenshaw_t(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of ``sum_k coeffs[k] T_k(x)``."""
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(len(coeffs) - 1, 0, -1):
        b1, b2 = coeffs[k] + 2.0 * x * b1 - b2, b1
    return coeffs[0] + x * b1 - b2


def _clenshaw_u(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of ``sum_k coeffs[k] U_k(x)``."""
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(len(coeffs) - 1, -1, -1):
        b1, b2 = coeffs[k] + 2.0 * x * b1 - b2, b1
    return b1


def clenshaw_eval(series: ChebyshevSeries, x):
    """Evaluate the truncated series with Clenshaw's backward recurrence.

    Only multiply-add operations are used; the result is bit-for-bit
    deterministic for fixed inputs and agrees with the naive
    ``sum a_k T_k(x)`` to rounding error.
    """
    arr, scalar = _validate_eval_point(x)
    return _maybe_scalar(_clenshaw_t(series.coefficients, arr), scalar)


def exact_psi(x, margin: float):
    """The exact margin transform ``cos(arccos(x) + margin)``.

    Computed through the cancellation-free identity
    ``x cos(m) - sqrt(1 - x^2) sin(m)``, which avoids arccos round-off
    near the domain edges.
    """
    arr, scalar = _validate_eval_point(x)
    # 1 - x^2 can round a hair below zero at |x| = 1.
    sine = np.sqrt(np.maximum(0.0, 1.0 - arr * arr))
    return _maybe_scalar(arr * math.cos(margin) - sine * math.sin(margin), scalar)


def exact_psi_grad(x, margin: float):
    """Derivative of the exact transform, ``cos(m) + x sin(m) / sqrt(1 - x^2)``.

    Unbounded as ``|x| -> 1``.  Points sitting exactly on ``|x| = 1`` are
    evaluated at the clamped abscissa ``1 - COS_EDGE_EPS`` so the result is
    a deterministic finite value rather than a division by zero.
    """
    arr, scalar = _validate_eval_point(x)
    clamped = np.where(np.abs(arr) >= 1.0, np.sign(arr) * (1.0 - COS_EDGE_EPS), arr)
    grad = math.cos(margin) + clamped * math.sin(margin) / np.sqrt(1.0 - clamped * clamped)
    return _maybe_scalar(grad, scalar)


def exact_psi_hessian(x, margin: float):
    """Second derivative of the exact transform, ``sin(m) (1 - x^2)^{-3/2}``.

    Same edge clamping as :func:`exact_psi_grad`.
    """
    arr, scalar = _validate_eval_point(x)
    clamped = np.where(np.abs(arr) >= 1.0, np.sign(arr) * (1.0 - COS_EDGE_EPS), arr)
    hess = math.sin(margin) * (1.0 - clamped * clamped) ** -1.5
    return _maybe_scalar(hess, scalar)


def _derivative_coefficients(coeffs: np.ndarray) -> np.ndarray:
    """T-series coefficients of the derivative of a T-series.

    Input and output both use the plain convention ``p = sum c_k T_k``.
    Standard backward recurrence d_{k-1} = d_{k+1} + 2k c_k, applied after
    doubling c_0 and halving d_0 to bridge the halved-constant convention
    the recurrence assumes.
    """
    n = len(coeffs) - 1
    if n == 0:
        return np.zeros(1)
    c = coeffs.astype(float).copy()
    c[0] *= 2.0
    d = np.zeros(n + 2)
    for k in range(n, 0, -1):
        d[k - 1] = d[k + 1] + 2.0 * k * c[k]
    out = d[:n].copy()
    out[0] /= 2.0
    return out


def series_derivative(series: ChebyshevSeries, x):
    """First derivative of the truncated series.

    Uses ``T_k' = k U_{k-1}``, so the value is a second-kind series
    ``sum_k k a_k U_{k-1}(x)`` evaluated by the U-form Clenshaw recurrence,
    which stays finite on the closed interval including both endpoints.
    """
    arr, scalar = _validate_eval_point(x)
    a = series.coefficients
    u_coeffs = np.arange(1, len(a)) * a[1:]
    return _maybe_scalar(_clenshaw_u(u_coeffs, arr), scalar)


def series_hessian(series: ChebyshevSeries, x):
    """Second derivative of the truncated series, finite on all of [-1, 1].

    In the interior the closed form

        f''(x) = (x f'(x) - sum_k k^2 a_k T_k(x)) / (1 - x^2)

    is used (it is the ``T_k``/``U_k`` trig form with the U-series summed).
    That expression is 0/0 at the endpoints, so within
    ``HESSIAN_ENDPOINT_SWITCH`` of ``|x| = 1`` the twice-differentiated
    coefficient series is evaluated instead; the truncated series is a
    polynomial, so its second derivative is finite everywhere.
    """
    arr, scalar = _validate_eval_point(x)
    arr = np.atleast_1d(arr)
    a = series.coefficients
    near_edge = np.abs(arr) > 1.0 - HESSIAN_ENDPOINT_SWITCH

    out = np.empty_like(arr)
    if np.any(~near_edge):
        xi = arr[~near_edge]
        k2a = np.arange(len(a)) ** 2 * a
        numer = xi * _clenshaw_u(np.arange(1, len(a)) * a[1:], xi) - _clenshaw_t(k2a, xi)
        out[~near_edge] = numer / (1.0 - xi * xi)
    if np.any(near_edge):
        d2 = _derivative_coefficients(_derivative_coefficients(a))
        out[near_edge] = _clenshaw_t(d2, arr[near_edge])
    return _maybe_scalar(out[0] if scalar else out, scalar)


def lipschitz_constant(series: ChebyshevSeries, grid_points: int = 100001) -> float:
    """Max of ``|f'|`` over a uniform grid on [-1, 1], endpoints included.

    For the margin series the supremum is attained at ``x = 1``, so the
    grid value converges to the true Lipschitz constant from below.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    grid = np.linspace(-1.0, 1.0, grid_points)
    return float(np.max(np.abs(series_derivative(series, grid))))


def approx_error_bound(margin: float, degree: int) -> float:
    """Uniform bound on ``|psi - f|`` for the degree-``degree`` series.

    The dropped coefficients are all positive and telescope:
    ``sum_{k > K} a_{2k} = 2 sin(m) / (pi (2K + 1))`` where ``2K`` is the
    largest even index kept.  Since ``|T_k| <= 1`` this also bounds the
    sup-norm error, and the bound is attained in the limit at ``x = 1``.
    """
    if not 0.0 <= margin < math.pi / 2:
        raise ValueError(f"margin must be in [0, pi/2), got {margin}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    half = degree // 2
    return 2.0 * math.sin(margin) / (math.pi * (2 * half + 1))
