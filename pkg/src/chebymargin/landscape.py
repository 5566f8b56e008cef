"""CSV exports of the transform curves and two-class derivative surfaces.

Numbers are written with ``repr`` (shortest round-trip decimal), so parsing
an exported file reproduces the in-memory values exactly.  Files are
written atomically (temp file, then rename).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import cheby_core
from .losses import LossSpec, binary_derivative_surface, binary_grad_target

# The exact second derivative grows like (1 - x^2)^{-3/2}; within this
# distance of the domain edge its CSV cells are left empty.
HESSIAN_BLANK_MARGIN = 1e-3

POINT_A = (0.8, 0.8)
POINT_B = (0.8, 0.2)


@dataclass
class CurveBundle:
    """x-grid plus labeled curve columns, in CSV column order."""

    x: np.ndarray
    columns: dict


@dataclass
class SurfaceBundle:
    """(s_p, s_n) axis plus one derivative matrix per loss."""

    axis: np.ndarray
    surfaces: dict
    point_a: tuple = POINT_A
    point_b: tuple = POINT_B


@dataclass
class GapReport:
    """Gradient magnitudes at the hard point A and the easy point B."""

    grad_a: float
    grad_b: float
    ratio: float


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _cell(value: float) -> str:
    return "" if np.isnan(value) else repr(float(value))


def export_curves(
    margin: float, degrees, grid_n: int, out_path: str | None = None
) -> CurveBundle:
    """Tabulate the exact transform and its series approximations.

    Columns: ``x, psi, psi_d1, psi_d2`` then ``cheb{d}, cheb{d}_d1,
    cheb{d}_d2`` per requested degree.  ``psi_d2`` is NaN in the bundle
    (empty in the CSV) within ``HESSIAN_BLANK_MARGIN`` of the edges, where
    the exact second derivative is off any plottable scale.
    """
    if grid_n < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_n}")
    x = np.linspace(-1.0, 1.0, grid_n)
    columns: dict = {}
    columns["psi"] = cheby_core.exact_psi(x, margin)
    columns["psi_d1"] = cheby_core.exact_psi_grad(x, margin)
    psi_d2 = np.full_like(x, np.nan)
    interior = np.abs(x) <= 1.0 - HESSIAN_BLANK_MARGIN
    psi_d2[interior] = cheby_core.exact_psi_hessian(x[interior], margin)
    columns["psi_d2"] = psi_d2
    for degree in degrees:
        series = cheby_core.coefficients(margin, degree)
        columns[f"cheb{degree}"] = cheby_core.clenshaw_eval(series, x)
        columns[f"cheb{degree}_d1"] = cheby_core.series_derivative(series, x)
        columns[f"cheb{degree}_d2"] = cheby_core.series_hessian(series, x)

    bundle = CurveBundle(x=x, columns=columns)
    if out_path is not None:
        lines = ["x," + ",".join(columns)]
        for i in range(grid_n):
            cells = [repr(float(x[i]))] + [_cell(col[i]) for col in columns.values()]
            lines.append(",".join(cells))
        _atomic_write(out_path, "\n".join(lines) + "\n")
    return bundle


def export_surfaces(specs, grid_n: int, out_path: str | None = None) -> SurfaceBundle:
    """Derivative surfaces of the two-class loss for each spec.

    The CSV is long-format ``loss,s_p,s_n,dL_dsp``, one row per grid node
    per loss.
    """
    if not specs:
        raise ValueError("need at least one loss spec")
    axis = None
    surfaces: dict = {}
    for spec in specs:
        label = spec.kind.value
        if label in surfaces:
            raise ValueError(f"duplicate loss kind {label} in surface export")
        axis, surfaces[label] = binary_derivative_surface(spec, grid_n)

    bundle = SurfaceBundle(axis=axis, surfaces=surfaces)
    if out_path is not None:
        lines = ["loss,s_p,s_n,dL_dsp"]
        for label, surface in surfaces.items():
            for i, sp in enumerate(axis):
                for j, sn in enumerate(axis):
                    lines.append(
                        f"{label},{float(sp)!r},{float(sn)!r},{float(surface[i, j])!r}"
                    )
        _atomic_write(out_path, "\n".join(lines) + "\n")
    return bundle


def derivative_gap(spec: LossSpec) -> GapReport:
    """Compare gradient magnitudes at the hard/easy probe points.

    A hard example has nearly tied logits (A), an easy one a wide gap (B);
    a larger ratio means the loss focuses its corrective signal on hard
    examples.
    """
    grad_a = abs(binary_grad_target(spec, *POINT_A))
    grad_b = abs(binary_grad_target(spec, *POINT_B))
    return GapReport(grad_a=grad_a, grad_b=grad_b, ratio=grad_a / grad_b)
