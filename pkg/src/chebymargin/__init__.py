"""Chebyshev-series angular margin losses and their diagnostics."""

from .cheby_core import (
    ChebyshevSeries,
    approx_error_bound,
    cheb_T,
    cheb_U,
    clenshaw_eval,
    coefficients,
    exact_psi,
    exact_psi_grad,
    exact_psi_hessian,
    lipschitz_constant,
    series_derivative,
    series_hessian,
)
from .landscape import derivative_gap, export_curves, export_surfaces
from .losses import (
    CosineBatch,
    LossKind,
    LossOutput,
    LossSpec,
    binary_derivative_surface,
    loss_forward,
    loss_grad_check,
    transform_target_logit,
)
from .numcheck import ScanReport, finite_diff_grad, max_abs_error, scan
from .toytrain import (
    TrainConfig,
    TrainTelemetry,
    detect_instability,
    make_sphere_clusters,
    train,
    warmup_cosine_lr,
)
from .verif_metrics import (
    DcfParams,
    TrialScore,
    compute_eer,
    compute_min_dcf,
    cosine_score,
    parse_trials,
)

__all__ = [
    "ChebyshevSeries",
    "CosineBatch",
    "DcfParams",
    "LossKind",
    "LossOutput",
    "LossSpec",
    "ScanReport",
    "TrainConfig",
    "TrainTelemetry",
    "TrialScore",
    "approx_error_bound",
    "binary_derivative_surface",
    "cheb_T",
    "cheb_U",
    "clenshaw_eval",
    "coefficients",
    "compute_eer",
    "compute_min_dcf",
    "cosine_score",
    "derivative_gap",
    "detect_instability",
    "exact_psi",
    "exact_psi_grad",
    "exact_psi_hessian",
    "export_curves",
    "export_surfaces",
    "finite_diff_grad",
    "lipschitz_constant",
    "loss_forward",
    "loss_grad_check",
    "make_sphere_clusters",
    "max_abs_error",
    "parse_trials",
    "scan",
    "series_derivative",
    "series_hessian",
    "train",
    "transform_target_logit",
    "warmup_cosine_lr",
]
