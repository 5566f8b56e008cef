#!/usr/bin/env python3
"""Paired stability runs: every loss on identical data, margin sweep.

For each margin, trains the toy cosine classifier with each loss kind on
the same seeded dataset and prints final accuracy, the gradient-norm peak,
and whether anything went non-finite.  Telemetry CSVs land in --outdir.
"""

import argparse
import os

from chebymargin.losses import LossKind, LossSpec
from chebymargin.toytrain import STABILITY_SCALE, TrainConfig, train


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--margins", default="0.3,0.5")
    parser.add_argument("--scale", type=float, default=STABILITY_SCALE)
    parser.add_argument("--degree", type=int, default=30)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--outdir", default="out")
    args = parser.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    print(f"{'margin':>6} {'loss':>10} {'accuracy':>9} {'grad_max':>9} {'nan':>5}")
    for margin in (float(m) for m in args.margins.split(",")):
        for kind in LossKind:
            if kind is LossKind.N_SOFTMAX:
                loss_margin = 0.0
            elif kind is LossKind.A_SOFTMAX:
                loss_margin = 2  # integer multiplier, not radians
            else:
                loss_margin = margin
            spec = LossSpec(kind, margin=loss_margin, scale=args.scale, degree=args.degree)
            config = TrainConfig(loss=spec, epochs=args.epochs, seed=args.seed)
            telemetry = train(config)
            tag = f"{kind.value}_m{spec.margin:g}"
            telemetry.write_csv(os.path.join(args.outdir, f"telemetry_{tag}.csv"))
            telemetry.write_summary(os.path.join(args.outdir, f"telemetry_{tag}.summary"))
            print(
                f"{margin:6g} {kind.value:>10} {telemetry.final_accuracy:9.4f} "
                f"{telemetry.grad_norm_max:9.2f} {str(telemetry.nan_seen).lower():>5}"
            )


if __name__ == "__main__":
    main()
