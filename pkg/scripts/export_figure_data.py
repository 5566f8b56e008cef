#!/usr/bin/env python3
"""Regenerate the curve and surface CSVs behind the transform/landscape plots.

Writes, into --outdir:
  curves_m{margin}.csv     exact transform + series approximations with
                           first and second derivatives
  surfaces_m{margin}.csv   two-class dL/ds_p surfaces for nsoftmax,
                           aamsoftmax, and chebyaam
  gap_sweep.csv            hard/easy gradient-gap ratios across scales
"""

import argparse
import os

from chebymargin.landscape import derivative_gap, export_curves, export_surfaces
from chebymargin.losses import LossKind, LossSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--margin", type=float, default=0.3)
    parser.add_argument("--degrees", default="2,30")
    parser.add_argument("--scale", type=float, default=32.0)
    parser.add_argument("--grid", type=int, default=2001)
    parser.add_argument("--surface-grid", type=int, default=201)
    parser.add_argument("--outdir", default="out")
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    degrees = [int(d) for d in args.degrees.split(",")]

    curves_path = os.path.join(args.outdir, f"curves_m{args.margin:g}.csv")
    export_curves(args.margin, degrees, args.grid, curves_path)
    print(f"wrote {curves_path}")

    specs = [
        LossSpec(LossKind.N_SOFTMAX, scale=args.scale),
        LossSpec(LossKind.AAM_SOFTMAX, margin=args.margin, scale=args.scale),
        LossSpec(LossKind.CHEBY_AAM, margin=args.margin, scale=args.scale, degree=max(degrees)),
    ]
    surfaces_path = os.path.join(args.outdir, f"surfaces_m{args.margin:g}.csv")
    export_surfaces(specs, args.surface_grid, surfaces_path)
    print(f"wrote {surfaces_path}")

    sweep_path = os.path.join(args.outdir, "gap_sweep.csv")
    lines = ["scale,loss,grad_A,grad_B,ratio"]
    for scale in (1.0, 30.0, 32.0, 64.0):
        for spec in (
            LossSpec(LossKind.AAM_SOFTMAX, margin=args.margin, scale=scale),
            LossSpec(LossKind.CHEBY_AAM, margin=args.margin, scale=scale, degree=max(degrees)),
        ):
            gap = derivative_gap(spec)
            lines.append(
                f"{scale:g},{spec.kind.value},{gap.grad_a!r},{gap.grad_b!r},{gap.ratio!r}"
            )
    with open(sweep_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {sweep_path}")


if __name__ == "__main__":
    main()
