"""Margin-based softmax losses over cosine-similarity logits.

Implements the classical family (normalized softmax, multiplicative angular
margin, additive cosine margin, additive angular margin) plus the
Chebyshev-series variant of the additive angular margin, all with analytic
gradients with respect to the input cosines.

Every loss is standard softmax cross entropy over scaled logits where only
the target-class logit is passed through the margin transform; non-target
logits are always left unchanged.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import cheby_core
from .cheby_core import COS_EDGE_EPS


class LossKind(enum.Enum):
    """The supported target-logit transforms."""

    N_SOFTMAX = "nsoftmax"
    A_SOFTMAX = "asoftmax"
    AM_SOFTMAX = "amsoftmax"
    AAM_SOFTMAX = "aamsoftmax"
    CHEBY_AAM = "chebyaam"


@dataclass(frozen=True)
class LossSpec:
    """Configuration of one margin loss.

    ``margin`` is radians for the angular kinds, a cosine offset for
    AM_SOFTMAX, and a positive integer multiplier for A_SOFTMAX.
    ``degree`` is only consulted for CHEBY_AAM.
    """

    kind: LossKind
    margin: float = 0.3
    scale: float = 32.0
    degree: int = 30

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.margin < 0:
            raise ValueError(f"margin must be non-negative, got {self.margin}")
        if self.kind is LossKind.A_SOFTMAX:
            if self.margin < 1 or self.margin != int(self.margin):
                raise ValueError(
                    f"A-Softmax margin must be a positive integer, got {self.margin}"
                )
        if self.kind is LossKind.CHEBY_AAM and self.degree < 1:
            raise ValueError(f"series degree must be >= 1, got {self.degree}")


@dataclass
class CosineBatch:
    """A batch of per-class cosine similarities with ground-truth labels."""

    cosines: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.cosines = np.asarray(self.cosines, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.cosines.ndim != 2:
            raise ValueError("cosines must be a [batch x classes] matrix")
        if not np.all(np.abs(self.cosines) <= 1.0):
            raise ValueError("cosines must be finite and within [-1, 1]")
        if self.labels.shape != (self.cosines.shape[0],):
            raise ValueError("labels must hold one class index per row")
        n_classes = self.cosines.shape[1]
        if self.labels.size and not np.all((self.labels >= 0) & (self.labels < n_classes)):
            raise ValueError(f"labels must lie in [0, {n_classes})")


@dataclass
class LossOutput:
    per_sample_loss: np.ndarray
    mean_loss: float
    grad_cosines: np.ndarray


@dataclass
class GradCheckReport:
    """Result of comparing analytic gradients against central differences."""

    max_rel_error: float
    max_abs_grad: float
    step: float
    flag_threshold: float
    large_grad_entries: list = field(default_factory=list)

    @property
    def has_large_grad(self) -> bool:
        return bool(self.large_grad_entries)


@functools.lru_cache(maxsize=None)
def _series(margin: float, degree: int) -> cheby_core.ChebyshevSeries:
    return cheby_core.coefficients(margin, degree)


def _a_softmax_transform(x: np.ndarray, m: int):
    # cos(m*theta) continued monotonically: (-1)^k cos(m theta) - 2k on the
    # interval where m*theta is in [k pi, (k+1) pi].
    clamped = np.clip(x, -1.0 + COS_EDGE_EPS, 1.0 - COS_EDGE_EPS)
    theta = np.arccos(clamped)
    k = np.floor(m * theta / math.pi)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    value = sign * np.cos(m * theta) - 2.0 * k
    grad = sign * m * np.sin(m * theta) / np.sqrt(1.0 - clamped * clamped)
    return value, grad


def _target_transform(spec: LossSpec, x: np.ndarray):
    """Transformed target logit and its derivative with respect to x."""
    x = np.asarray(x, dtype=float)
    if spec.kind is LossKind.N_SOFTMAX:
        return x, np.ones_like(x)
    if spec.kind is LossKind.AM_SOFTMAX:
        return x - spec.margin, np.ones_like(x)
    if spec.kind is LossKind.A_SOFTMAX:
        return _a_softmax_transform(x, int(spec.margin))
    if spec.kind is LossKind.AAM_SOFTMAX:
        return (
            cheby_core.exact_psi(x, spec.margin),
            cheby_core.exact_psi_grad(x, spec.margin),
        )
    series = _series(spec.margin, spec.degree)
    return (
        cheby_core.clenshaw_eval(series, x),
        cheby_core.series_derivative(series, x),
    )


def transform_target_logit(spec: LossSpec, x):
    """Apply the target-logit margin transform of ``spec`` to cosine ``x``."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.abs(arr) <= 1.0):
        raise ValueError("cosine must satisfy |x| <= 1")
    value, _ = _target_transform(spec, arr)
    return float(value) if arr.ndim == 0 else value


def loss_forward(spec: LossSpec, batch: CosineBatch) -> LossOutput:
    """Softmax cross entropy with the margin applied to the target logit.

    The per-sample loss is ``-log softmax(s * z)_y`` where ``z`` equals the
    cosines except ``z_y = psi(x_y)``.  Softmax uses per-row max subtraction
    so scale-32 logits cannot overflow.  ``grad_cosines`` holds the analytic
    per-sample derivative with respect to every cosine entry; the target
    column is ``-s * psi'(x_y) * sum_{j != y} p_j`` with the non-target
    probability mass summed directly so it survives heavy saturation.
    """
    cosines, labels = batch.cosines, batch.labels
    if cosines.size == 0:
        raise ValueError("batch must not be empty")
    if cosines.shape[1] < 2:
        raise ValueError("batch needs at least two classes")
    if not np.all(np.isfinite(cosines)):
        raise ValueError("cosines must be finite")

    rows = np.arange(cosines.shape[0])
    target_cos = cosines[rows, labels]
    psi, dpsi = _target_transform(spec, target_cos)

    logits = spec.scale * cosines
    logits[rows, labels] = spec.scale * psi
    logits_max = logits.max(axis=1, keepdims=True)
    exp = np.exp(logits - logits_max)
    denom = exp.sum(axis=1, keepdims=True)
    probs = exp / denom

    exp_nontarget = exp.copy()
    exp_nontarget[rows, labels] = 0.0
    nontarget_mass = exp_nontarget.sum(axis=1) / denom[:, 0]

    per_sample = np.log(denom[:, 0]) - (logits[rows, labels] - logits_max[:, 0])
    grad = spec.scale * probs
    grad[rows, labels] = -spec.scale * dpsi * nontarget_mass
    return LossOutput(
        per_sample_loss=per_sample,
        mean_loss=float(np.mean(per_sample)),
        grad_cosines=grad,
    )


def loss_grad_check(
    spec: LossSpec,
    batch: CosineBatch,
    step: float = 1e-5,
    flag_threshold: float = 100.0,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Each cosine entry is perturbed by ``+-step`` and the per-sample loss
    difference quotient is compared entry-by-entry with ``grad_cosines``.
    Rows are independent, so one forward pass per perturbed column covers
    the whole batch.  The relative error uses ``max(1, |fd|, |analytic|)``
    as denominator so that near-zero entries are judged on absolute error.
    Entries whose analytic gradient magnitude exceeds ``flag_threshold``
    are reported in ``large_grad_entries``.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    analytic = loss_forward(spec, batch).grad_cosines
    cosines, labels = batch.cosines, batch.labels

    max_rel = 0.0
    for col in range(cosines.shape[1]):
        plus = cosines.copy()
        plus[:, col] += step
        minus = cosines.copy()
        minus[:, col] -= step
        loss_plus = loss_forward(spec, CosineBatch(np.clip(plus, -1, 1), labels))
        loss_minus = loss_forward(spec, CosineBatch(np.clip(minus, -1, 1), labels))
        fd = (loss_plus.per_sample_loss - loss_minus.per_sample_loss) / (2.0 * step)
        denom = np.maximum(1.0, np.maximum(np.abs(fd), np.abs(analytic[:, col])))
        max_rel = max(max_rel, float(np.max(np.abs(fd - analytic[:, col]) / denom)))

    large = [(int(i), int(j)) for i, j in zip(*np.nonzero(np.abs(analytic) > flag_threshold))]
    return GradCheckReport(
        max_rel_error=max_rel,
        max_abs_grad=float(np.max(np.abs(analytic))),
        step=step,
        flag_threshold=flag_threshold,
        large_grad_entries=large,
    )


def binary_derivative_surface(spec: LossSpec, grid_n: int = 201):
    """Derivative of the two-class loss with respect to the target logit.

    Evaluates the loss on every node of a ``grid_n x grid_n`` grid over
    ``(s_p, s_n) in [-1, 1]^2``, target logit ``s_p``, and returns
    ``(axis, surface)`` where ``surface[i, j]`` is the analytic
    ``d loss / d s_p`` at ``(axis[i], axis[j])``.
    """
    if grid_n < 2:
        raise ValueError(f"grid resolution must be >= 2, got {grid_n}")
    axis = np.linspace(-1.0, 1.0, grid_n)
    sp, sn = np.meshgrid(axis, axis, indexing="ij")
    cosines = np.column_stack([sp.ravel(), sn.ravel()])
    labels = np.zeros(cosines.shape[0], dtype=int)
    out = loss_forward(spec, CosineBatch(cosines, labels))
    return axis, out.grad_cosines[:, 0].reshape(grid_n, grid_n)


def binary_grad_target(spec: LossSpec, s_p: float, s_n: float) -> float:
    """``d loss / d s_p`` of the two-class loss at a single point."""
    out = loss_forward(spec, CosineBatch(np.array([[s_p, s_n]]), np.array([0])))
    return float(out.grad_cosines[0, 0])
