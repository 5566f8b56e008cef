"""Tests for the margin-loss family and its analytic gradients."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebymargin.cheby_core import (
    approx_error_bound,
    exact_psi,
    exact_psi_grad,
    coefficients,
    lipschitz_constant,
)
from chebymargin.losses import (
    CosineBatch,
    LossKind,
    LossSpec,
    binary_derivative_surface,
    binary_grad_target,
    loss_forward,
    loss_grad_check,
    transform_target_logit,
)

ALL_SPECS = [
    LossSpec(LossKind.N_SOFTMAX, margin=0.0),
    LossSpec(LossKind.A_SOFTMAX, margin=2),
    LossSpec(LossKind.AM_SOFTMAX, margin=0.2),
    LossSpec(LossKind.AAM_SOFTMAX, margin=0.3),
    LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=30),
]


def random_batch(seed, rows=8, classes=16, limit=0.95):
    rng = np.random.default_rng(seed)
    return CosineBatch(
        rng.uniform(-limit, limit, (rows, classes)),
        rng.integers(0, classes, rows),
    )


class TestLossSpec:
    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            LossSpec(LossKind.N_SOFTMAX, scale=0.0)

    def test_rejects_negative_margin(self):
        with pytest.raises(ValueError):
            LossSpec(LossKind.AAM_SOFTMAX, margin=-0.1)

    def test_a_softmax_needs_integer_margin(self):
        with pytest.raises(ValueError):
            LossSpec(LossKind.A_SOFTMAX, margin=1.5)
        LossSpec(LossKind.A_SOFTMAX, margin=3)

    def test_cheby_needs_degree(self):
        with pytest.raises(ValueError):
            LossSpec(LossKind.CHEBY_AAM, degree=0)


class TestCosineBatch:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            CosineBatch(np.array([[0.5, 1.5]]), np.array([0]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            CosineBatch(np.array([[0.5, np.nan]]), np.array([0]))

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            CosineBatch(np.array([[0.5, 0.2]]), np.array([2]))


class TestTransform:
    def test_aam_value(self):
        spec = LossSpec(LossKind.AAM_SOFTMAX, margin=0.3)
        assert transform_target_logit(spec, 0.5) == pytest.approx(
            exact_psi(0.5, 0.3), abs=1e-15
        )
        assert transform_target_logit(spec, 0.5) == pytest.approx(0.22174, abs=1e-5)

    def test_am_is_plain_subtraction(self):
        spec = LossSpec(LossKind.AM_SOFTMAX, margin=0.2)
        assert transform_target_logit(spec, 0.5) == pytest.approx(0.3, abs=1e-15)

    def test_cheby_close_to_aam(self):
        spec = LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=30)
        aam = exact_psi(0.5, 0.3)
        assert abs(transform_target_logit(spec, 0.5) - aam) <= approx_error_bound(0.3, 30)

    def test_n_softmax_is_identity(self):
        spec = LossSpec(LossKind.N_SOFTMAX)
        x = np.linspace(-1, 1, 11)
        np.testing.assert_array_equal(transform_target_logit(spec, x), x)

    def test_a_softmax_multiplies_angle(self):
        """A-Softmax with m=2 equals the monotone continuation of
        cos(2 theta); at theta <= pi/2 that is plain cos(2 theta)."""
        spec = LossSpec(LossKind.A_SOFTMAX, margin=2)
        x = 0.8
        assert transform_target_logit(spec, x) == pytest.approx(
            math.cos(2 * math.acos(x)), abs=1e-9
        )
        # beyond theta = pi/2 the continuation branch takes over
        assert transform_target_logit(spec, -0.5) == pytest.approx(
            -math.cos(2 * math.acos(-0.5)) - 2.0, abs=1e-9
        )

    def test_a_softmax_monotone_decreasing_in_angle(self):
        spec = LossSpec(LossKind.A_SOFTMAX, margin=2)
        x = np.linspace(-1, 1, 501)
        values = transform_target_logit(spec, x)
        assert np.all(np.diff(values) > 0)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_a_softmax_continuous_across_branch_seams(self, m):
        """The piecewise continuation is C0 and C1 at every seam
        m*arccos(x) = k*pi: values agree across the seam and the slope
        tends to zero there (sin(m theta) -> 0)."""
        spec = LossSpec(LossKind.A_SOFTMAX, margin=m)
        eps = 1e-9
        for k in range(1, m):
            seam = math.cos(k * math.pi / m)
            below = transform_target_logit(spec, seam - eps)
            above = transform_target_logit(spec, seam + eps)
            assert below == pytest.approx(above, abs=1e-6)
            fd = (above - below) / (2 * eps)
            local_scale = m * m  # slope magnitude away from the seam
            assert abs(fd) < local_scale

    @given(x=st.floats(min_value=-0.98, max_value=0.999))
    @settings(max_examples=100)
    def test_margins_penalize_target(self, x):
        """AAM and AM transforms sit strictly below the identity wherever
        the shifted angle stays within [0, pi]; the AAM inequality flips on
        the sliver x < -cos(m/2) where arccos(x) + m wraps past pi."""
        am = LossSpec(LossKind.AM_SOFTMAX, margin=0.2)
        aam = LossSpec(LossKind.AAM_SOFTMAX, margin=0.3)
        assert transform_target_logit(am, x) < x
        if x > -math.cos(0.15):
            assert transform_target_logit(aam, x) < x

    def test_cheby_converges_to_aam_with_degree(self):
        x = np.linspace(-1, 1, 2001)
        aam = exact_psi(x, 0.3)
        gaps = []
        for degree in (2, 4, 8, 16, 30, 50):
            spec = LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=degree)
            gap = np.max(np.abs(transform_target_logit(spec, x) - aam))
            assert gap <= approx_error_bound(0.3, degree) + 1e-12
            gaps.append(gap)
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))

    def test_rejects_out_of_domain(self):
        with pytest.raises(ValueError):
            transform_target_logit(LossSpec(LossKind.N_SOFTMAX), 1.2)


class TestLossForward:
    def test_equal_logits_give_ln2(self):
        spec = LossSpec(LossKind.N_SOFTMAX, scale=1.0)
        for c in (-0.4, 0.0, 0.7):
            batch = CosineBatch(np.array([[c, c]]), np.array([0]))
            out = loss_forward(spec, batch)
            assert out.mean_loss == pytest.approx(math.log(2), abs=1e-14)

    def test_two_class_softmax_arithmetic(self):
        """-log(e^1.8 / (e^1.8 + e^0.2)) = log(1 + e^-1.6)."""
        spec = LossSpec(LossKind.N_SOFTMAX, scale=2.0)
        batch = CosineBatch(np.array([[0.9, 0.1]]), np.array([0]))
        out = loss_forward(spec, batch)
        assert out.mean_loss == pytest.approx(math.log(1 + math.exp(-1.6)), abs=1e-14)
        assert out.mean_loss == pytest.approx(0.18390, abs=1e-4)

    def test_cheby_zero_margin_equals_n_softmax(self):
        batch = random_batch(7)
        cheby = loss_forward(LossSpec(LossKind.CHEBY_AAM, margin=0.0, degree=12), batch)
        plain = loss_forward(LossSpec(LossKind.N_SOFTMAX), batch)
        np.testing.assert_allclose(cheby.per_sample_loss, plain.per_sample_loss, atol=1e-12)
        np.testing.assert_allclose(cheby.grad_cosines, plain.grad_cosines, atol=1e-12)

    def test_loss_non_negative(self):
        for spec in ALL_SPECS:
            out = loss_forward(spec, random_batch(3))
            assert np.all(out.per_sample_loss >= 0.0)

    @given(classes=st.integers(min_value=2, max_value=40), scale=st.floats(0.5, 64.0))
    @settings(max_examples=30)
    def test_uniform_logits_give_ln_c(self, classes, scale):
        spec = LossSpec(LossKind.N_SOFTMAX, scale=scale)
        batch = CosineBatch(np.full((3, classes), 0.25), np.array([0, 1, classes - 1]))
        out = loss_forward(spec, batch)
        np.testing.assert_allclose(out.per_sample_loss, math.log(classes), atol=1e-12)

    def test_n_softmax_gradient_rows_sum_to_zero(self):
        out = loss_forward(LossSpec(LossKind.N_SOFTMAX, scale=32.0), random_batch(11))
        np.testing.assert_allclose(out.grad_cosines.sum(axis=1), 0.0, atol=1e-12)

    def test_rejects_empty_batch(self):
        with pytest.raises(ValueError):
            loss_forward(
                LossSpec(LossKind.N_SOFTMAX),
                CosineBatch(np.empty((0, 4)), np.empty(0, dtype=int)),
            )

    def test_rejects_single_class(self):
        with pytest.raises(ValueError):
            loss_forward(
                LossSpec(LossKind.N_SOFTMAX), CosineBatch(np.array([[0.5]]), np.array([0]))
            )

    def test_overflow_safe_at_scale_64(self):
        spec = LossSpec(LossKind.N_SOFTMAX, scale=64.0)
        out = loss_forward(spec, random_batch(5, limit=0.999))
        assert np.all(np.isfinite(out.per_sample_loss))
        assert np.all(np.isfinite(out.grad_cosines))

    def test_target_gradient_survives_deep_saturation(self):
        """Deep in the saturated regime the target probability rounds to
        exactly 1, but the non-target mass is still representable; the
        target gradient must keep its tiny non-zero value instead of
        collapsing to 0 through 1 - p."""
        spec = LossSpec(LossKind.N_SOFTMAX, scale=100.0)
        out = loss_forward(spec, CosineBatch(np.array([[0.9, -0.9]]), np.array([0])))
        target_grad = out.grad_cosines[0, 0]
        assert target_grad != 0.0
        assert target_grad == pytest.approx(-100.0 * math.exp(-180.0), rel=1e-12)


class TestGradCheck:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.kind.value)
    def test_analytic_matches_finite_differences(self, spec):
        worst = max(
            loss_grad_check(spec, random_batch(seed)).max_rel_error for seed in range(10)
        )
        assert worst <= 1e-5

    def test_n_softmax_tighter_tolerance(self):
        spec = LossSpec(LossKind.N_SOFTMAX)
        worst = max(
            loss_grad_check(spec, random_batch(seed)).max_rel_error for seed in range(10)
        )
        assert worst <= 1e-6

    def test_flags_large_gradient_near_edge(self):
        """An AAM target cosine of 0.99999 next to a competitive hard
        negative drives the analytic target gradient past 100; the report
        points at the entry."""
        spec = LossSpec(LossKind.AAM_SOFTMAX, margin=0.3, scale=32.0)
        cosines = np.array([[0.99999, 0.97, -0.2, 0.0]])
        batch = CosineBatch(cosines, np.array([0]))
        report = loss_grad_check(spec, batch)
        assert exact_psi_grad(0.99999, 0.3) * 32.0 > 100
        assert report.has_large_grad
        assert (0, 0) in report.large_grad_entries
        assert report.max_abs_grad > 100

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            loss_grad_check(ALL_SPECS[0], random_batch(0), step=0.0)


class TestBinarySurface:
    def test_diagonal_value_for_n_softmax(self):
        """With tied logits the target probability is 1/2, so the
        derivative is -(1 - 1/2) * s = -0.5 at s = 1 anywhere on the
        diagonal."""
        spec = LossSpec(LossKind.N_SOFTMAX, scale=1.0)
        for c in (-0.8, 0.0, 0.63):
            assert binary_grad_target(spec, c, c) == pytest.approx(-0.5, abs=1e-12)

    def test_shift_invariance_for_n_softmax(self):
        spec = LossSpec(LossKind.N_SOFTMAX, scale=32.0)
        base = binary_grad_target(spec, 0.3, -0.1)
        for delta in (-0.2, 0.1, 0.4):
            assert binary_grad_target(spec, 0.3 + delta, -0.1 + delta) == pytest.approx(
                base, rel=1e-9
            )

    def test_hard_point_gets_larger_gradient_than_easy_point(self):
        spec = LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=30, scale=32.0)
        hard = abs(binary_grad_target(spec, 0.8, 0.8))
        easy = abs(binary_grad_target(spec, 0.8, 0.2))
        assert np.isfinite(hard) and np.isfinite(easy)
        assert hard > easy

    def test_surfaces_finite_everywhere(self):
        for kind in (LossKind.N_SOFTMAX, LossKind.AAM_SOFTMAX, LossKind.CHEBY_AAM):
            spec = LossSpec(kind, margin=0.3, scale=32.0, degree=30)
            _, surface = binary_derivative_surface(spec, 201)
            assert surface.shape == (201, 201)
            assert np.all(np.isfinite(surface))

    def test_cheby_surface_bounded_by_lipschitz(self):
        spec = LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=30, scale=32.0)
        _, surface = binary_derivative_surface(spec, 201)
        ceiling = spec.scale * (1.0 + lipschitz_constant(coefficients(0.3, 30)))
        assert np.max(np.abs(surface)) <= ceiling

    def test_aam_gradient_diverges_toward_edge(self):
        """The arccos-path gradient keeps growing by more than 10x as the
        target logit steps from 1-1e-6 to 1-1e-10, while the series
        gradient barely moves."""
        aam = LossSpec(LossKind.AAM_SOFTMAX, margin=0.3, scale=32.0)
        near = abs(binary_grad_target(aam, 1 - 1e-6, 0.2))
        nearer = abs(binary_grad_target(aam, 1 - 1e-10, 0.2))
        assert nearer > 10 * near
        cheby = LossSpec(LossKind.CHEBY_AAM, margin=0.3, degree=30, scale=32.0)
        c_near = abs(binary_grad_target(cheby, 1 - 1e-6, 0.2))
        c_nearer = abs(binary_grad_target(cheby, 1 - 1e-10, 0.2))
        assert abs(c_nearer - c_near) / c_near < 0.01

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            binary_derivative_surface(ALL_SPECS[0], 1)
