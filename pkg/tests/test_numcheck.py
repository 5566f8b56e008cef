"""Tests for the finite-difference and grid-scan oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebymargin.cheby_core import (
    clenshaw_eval,
    coefficients,
    exact_psi,
    exact_psi_grad,
    series_derivative,
)
from chebymargin.numcheck import finite_diff_grad, max_abs_error, scan


class TestFiniteDiff:
    def test_identity_function(self):
        assert finite_diff_grad(lambda x: x, 0.4, 1e-5) == pytest.approx(1.0, abs=1e-10)

    @given(
        a=st.floats(-2, 2),
        b=st.floats(-2, 2),
        c=st.floats(-2, 2),
        x=st.floats(-1, 1),
    )
    @settings(max_examples=50)
    def test_exact_on_quadratics(self, a, b, c, x):
        """The central stencil is exact for quadratics; only rounding
        remains."""
        f = lambda t: a * t * t + b * t + c
        assert finite_diff_grad(f, x, 1e-4) == pytest.approx(2 * a * x + b, abs=1e-9)

    @given(a3=st.floats(-0.05, 0.05), x=st.floats(-1, 1))
    @settings(max_examples=50)
    def test_cubic_truncation_within_gate(self, a3, x):
        """For a cubic the stencil error is exactly a3 h^2, so small cubic
        coefficients stay under 1e-9 at h = 1e-4."""
        f = lambda t: a3 * t**3
        assert abs(finite_diff_grad(f, x, 1e-4) - 3 * a3 * x * x) <= 1e-9

    def test_exact_psi_gradient_value(self):
        value = finite_diff_grad(lambda x: exact_psi(x, 0.3), 0.5, 1e-5)
        oracle = math.sin(math.acos(0.5) + 0.3) / math.sqrt(1 - 0.25)
        assert value == pytest.approx(oracle, rel=1e-8)
        assert value == pytest.approx(1.12596, abs=1e-5)
        assert value == pytest.approx(exact_psi_grad(0.5, 0.3), rel=1e-8)

    def test_cross_checks_series_derivative(self):
        series = coefficients(0.3, 30)
        fd = finite_diff_grad(lambda x: clenshaw_eval(series, x), 0.5, 1e-5)
        assert fd == pytest.approx(series_derivative(series, 0.5), rel=1e-6)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda x: x, 0.0, 0.0)

    def test_propagates_domain_errors(self):
        series = coefficients(0.3, 10)
        with pytest.raises(ValueError):
            finite_diff_grad(lambda x: clenshaw_eval(series, x), 1.0, 1e-5)


class TestScan:
    def test_constant_zero(self):
        report = scan(lambda x: 0.0 * x, -1.0, 1.0, 11)
        assert report.max_abs == 0.0
        assert report.values.shape == (11,)

    def test_series_derivative_peak(self):
        """The degree-30 derivative peaks at the right endpoint."""
        series = coefficients(0.3, 30)
        report = scan(lambda x: series_derivative(series, x), -1.0, 1.0, 100001)
        assert report.argmax == 1.0
        assert report.max_abs == pytest.approx(6.78, abs=5e-3)

    def test_exact_hessian_scan_stops_before_edge(self):
        """The exact second derivative at |x| = 0.999 is ~3306 for
        margin 0.3; scanned on [-0.999, 0.999] the peak sits at the ends."""
        f = lambda x: math.sin(0.3) * (1 - x * x) ** -1.5
        report = scan(f, -0.999, 0.999, 10001)
        oracle = math.sin(0.3) * (1 - 0.999**2) ** -1.5
        assert report.max_abs == pytest.approx(oracle, rel=1e-12)
        assert oracle > 3000
        assert abs(report.argmax) == 0.999

    def test_accepts_non_vectorized_functions(self):
        report = scan(lambda x: float(x) ** 2, 0.0, 2.0, 5)
        np.testing.assert_allclose(report.values, [0.0, 0.25, 1.0, 2.25, 4.0])

    def test_bit_identical_reruns(self):
        series = coefficients(0.2, 20)
        a = scan(lambda x: clenshaw_eval(series, x), -1, 1, 1001)
        b = scan(lambda x: clenshaw_eval(series, x), -1, 1, 1001)
        assert a.values.tobytes() == b.values.tobytes()
        assert (a.max_abs, a.argmax) == (b.max_abs, b.argmax)

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            scan(lambda x: x, 1.0, -1.0, 10)
        with pytest.raises(ValueError):
            scan(lambda x: x, -1.0, 1.0, 1)


class TestMaxAbsError:
    def test_zero_margin_exact(self):
        assert max_abs_error(0.0, 10, 1001) <= 1e-15

    def test_degree_30_under_bound(self):
        assert max_abs_error(0.3, 30, 100001) <= 2 * math.sin(0.3) / (31 * math.pi) + 1e-12

    def test_degree_2_larger_than_degree_30(self):
        low = max_abs_error(0.3, 2, 100001)
        high = max_abs_error(0.3, 30, 100001)
        assert low <= 2 * math.sin(0.3) / (3 * math.pi) + 1e-12
        assert low == pytest.approx(0.0627, abs=1e-4)
        assert high < low

    def test_monotone_in_even_degree(self):
        errors = [max_abs_error(0.3, d, 20001) for d in (2, 4, 6, 10, 20, 30, 40)]
        assert all(b <= a + 1e-15 for a, b in zip(errors, errors[1:]))

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            max_abs_error(0.3, 30, 1)
