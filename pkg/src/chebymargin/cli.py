"""Command-line interface.

Subcommands: coeffs, eval-psi, gradcheck, lipschitz, landscape, train,
score.  Every run prints its fully resolved configuration on stderr, data
tables go to stdout, and bulk grids go to ``--out`` files.  Exit codes:
0 success, 1 usage or I/O error, 2 check failure.

Defaults for ``--seed`` come from the ``CHEBYMARGIN_SEED`` environment
variable when set.  Each subcommand accepts ``--config FILE`` with
``key=value`` lines (``#`` comments allowed); explicit flags win over
config-file values.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import cheby_core, landscape, verif_metrics
from .losses import CosineBatch, LossKind, LossSpec, loss_grad_check
from .toytrain import TrainConfig, train

SEED_ENV = "CHEBYMARGIN_SEED"
LOSS_CHOICES = [kind.value for kind in LossKind]


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _loss_spec(args) -> LossSpec:
    return LossSpec(
        kind=LossKind(args.loss),
        margin=args.margin,
        scale=args.scale,
        degree=args.degree,
    )


def _print_resolved(args) -> None:
    skip = {"func", "config"}
    pairs = " ".join(
        f"{key}={value}" for key, value in sorted(vars(args).items()) if key not in skip
    )
    print(f"# config {pairs}", file=sys.stderr)


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, value = stripped.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_file(parser, subparsers, argv) -> None:
    """Install config-file values as subparser defaults so flags win."""
    sub_name = next((token for token in argv if not token.startswith("-")), None)
    config_path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif token.startswith("--config="):
            config_path = token.split("=", 1)[1]
    if sub_name is None or config_path is None:
        return
    subparser = subparsers.choices.get(sub_name)
    if subparser is None:
        return
    actions = {action.dest: action for action in subparser._actions}
    defaults = {}
    for key, raw in _read_config_file(config_path).items():
        action = actions.get(key)
        if action is None:
            parser.error(f"unknown config key {key!r} for subcommand {sub_name!r}")
        defaults[key] = action.type(raw) if action.type else raw
    subparser.set_defaults(**defaults)


def _cmd_coeffs(args) -> int:
    series = cheby_core.coefficients(args.margin, args.degree)
    print("k,a_k")
    for k, a_k in enumerate(series.coefficients):
        print(f"{k},{float(a_k)!r}")
    return 0


def _cmd_eval_psi(args) -> int:
    series = cheby_core.coefficients(args.margin, args.degree)
    exact = cheby_core.exact_psi(args.x, args.margin)
    approx = cheby_core.clenshaw_eval(series, args.x)
    print(f"psi={exact!r}")
    print(f"cheb{args.degree}={approx!r}")
    print(f"abs_error={abs(exact - approx)!r}")
    print(f"error_bound={cheby_core.approx_error_bound(args.margin, args.degree)!r}")
    return 0


def _cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    cosines = rng.uniform(-0.95, 0.95, (args.batch_size, args.classes))
    labels = rng.integers(0, args.classes, args.batch_size)
    report = loss_grad_check(_loss_spec(args), CosineBatch(cosines, labels), step=args.step)
    print(f"max_rel_error={report.max_rel_error!r}")
    print(f"max_abs_grad={report.max_abs_grad!r}")
    if report.has_large_grad:
        print(f"large_grad_entries={report.large_grad_entries}")
    if report.max_rel_error <= args.tol:
        print("gradcheck PASS")
        return 0
    print(f"gradcheck FAIL (tol {args.tol!r})")
    return 2


def _cmd_lipschitz(args) -> int:
    series = cheby_core.coefficients(args.margin, args.degree)
    print(f"{cheby_core.lipschitz_constant(series, args.grid)!r}")
    return 0


def _cmd_landscape(args) -> int:
    if args.kind == "curves":
        degrees = [int(d) for d in args.degrees.split(",") if d]
        landscape.export_curves(args.margin, degrees, args.grid, args.out)
    else:
        specs = [
            LossSpec(
                kind=LossKind(name),
                margin=args.margin,
                scale=args.scale,
                degree=args.degree,
            )
            for name in args.losses.split(",")
            if name
        ]
        landscape.export_surfaces(specs, args.grid, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = TrainConfig(
        loss=_loss_spec(args),
        epochs=args.epochs,
        batch_size=args.batch_size,
        peak_lr=args.peak_lr,
        warmup_fraction=args.warmup_fraction,
        seed=args.seed,
        dim=args.dim,
        num_classes=args.classes,
        samples_per_class=args.samples_per_class,
        spread=args.spread,
        momentum=args.momentum,
    )
    telemetry = train(config)
    telemetry.write_csv(args.out)
    summary_path = args.summary_out or f"{args.out}.summary"
    telemetry.write_summary(summary_path)
    print(f"steps={len(telemetry.records)}")
    print(f"final_accuracy={telemetry.final_accuracy!r}")
    print(f"grad_norm_max={telemetry.grad_norm_max!r}")
    print(f"nan_seen={str(telemetry.nan_seen).lower()}")
    print(f"wrote {args.out} and {summary_path}")
    return 0


def _cmd_score(args) -> int:
    trials = verif_metrics.parse_trials(args.trials, args.scores)
    eer, _ = verif_metrics.compute_eer(trials)
    min_dcf = verif_metrics.compute_min_dcf(
        trials, verif_metrics.DcfParams(p_target=args.p_target)
    )
    print(f"EER% {eer * 100.0:.4f}")
    print(f"minDCF {min_dcf:.4f}")
    return 0


def _add_loss_flags(sub, default_margin=0.3):
    sub.add_argument("--loss", choices=LOSS_CHOICES, default="chebyaam", help="loss kind")
    sub.add_argument("--margin", type=float, default=default_margin, help="margin")
    sub.add_argument("--scale", type=float, default=32.0, help="logit scale factor")
    sub.add_argument("--degree", type=int, default=30, help="series degree")


def build_parser() -> tuple[_Parser, argparse._SubParsersAction]:
    parser = _Parser(
        prog="chebymargin",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_text):
        sub = subparsers.add_parser(
            name,
            help=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        sub.add_argument("--config", default=None, help="key=value config file")
        sub.set_defaults(func=func)
        return sub

    sub = add("coeffs", _cmd_coeffs, "print the series coefficients as k,a_k CSV")
    sub.add_argument("--margin", type=float, default=0.3, help="margin in radians")
    sub.add_argument("--degree", type=int, default=30, help="series degree")

    sub = add("eval-psi", _cmd_eval_psi, "evaluate the exact and series transforms at x")
    sub.add_argument("--margin", type=float, default=0.3, help="margin in radians")
    sub.add_argument("--degree", type=int, default=30, help="series degree")
    sub.add_argument("--x", type=float, default=0.5, help="cosine evaluation point")

    sub = add("gradcheck", _cmd_gradcheck, "finite-difference check of the analytic gradient")
    _add_loss_flags(sub)
    sub.add_argument("--batch-size", type=int, default=8, help="rows in the random batch")
    sub.add_argument("--classes", type=int, default=16, help="columns in the random batch")
    sub.add_argument("--step", type=float, default=1e-5, help="finite-difference step")
    sub.add_argument("--tol", type=float, default=1e-5, help="max relative error to pass")
    sub.add_argument("--seed", type=int, default=_default_seed(), help="batch seed")

    sub = add("lipschitz", _cmd_lipschitz, "grid Lipschitz constant of the series transform")
    sub.add_argument("--margin", type=float, default=0.3, help="margin in radians")
    sub.add_argument("--degree", type=int, default=30, help="series degree")
    sub.add_argument("--grid", type=int, default=100001, help="grid points on [-1, 1]")

    sub = add("landscape", _cmd_landscape, "export curve or surface CSV data")
    sub.add_argument("--kind", choices=["curves", "surfaces"], default="curves")
    sub.add_argument("--margin", type=float, default=0.3, help="margin in radians")
    sub.add_argument("--degrees", default="2,30", help="comma list of degrees (curves)")
    sub.add_argument("--degree", type=int, default=30, help="series degree (surfaces)")
    sub.add_argument("--scale", type=float, default=32.0, help="logit scale (surfaces)")
    sub.add_argument(
        "--losses",
        default="nsoftmax,aamsoftmax,chebyaam",
        help="comma list of loss kinds (surfaces)",
    )
    sub.add_argument("--grid", type=int, default=201, help="grid points per axis")
    sub.add_argument("--out", required=True, help="output CSV path")

    sub = add("train", _cmd_train, "train the toy cosine classifier and dump telemetry")
    _add_loss_flags(sub)
    sub.add_argument("--epochs", type=int, default=30, help="training epochs")
    sub.add_argument("--batch-size", type=int, default=64, help="SGD batch size")
    sub.add_argument("--peak-lr", type=float, default=0.2, help="peak learning rate")
    sub.add_argument("--warmup-fraction", type=float, default=0.1, help="warmup span")
    sub.add_argument("--dim", type=int, default=32, help="embedding dimension")
    sub.add_argument("--classes", type=int, default=16, help="number of classes")
    sub.add_argument("--samples-per-class", type=int, default=200, help="points per class")
    sub.add_argument("--spread", type=float, default=0.005, help="cluster noise scale")
    sub.add_argument("--momentum", type=float, default=0.0, help="SGD momentum")
    sub.add_argument("--seed", type=int, default=_default_seed(), help="run seed")
    sub.add_argument("--out", required=True, help="telemetry CSV path")
    sub.add_argument("--summary-out", default=None, help="summary path (default OUT.summary)")

    sub = add("score", _cmd_score, "EER and minDCF from trial and score files")
    sub.add_argument("--trials", required=True, help="trial list: label enroll test")
    sub.add_argument("--scores", required=True, help="score list: enroll test score")
    sub.add_argument("--p-target", type=float, default=0.01, help="target prior")

    return parser, subparsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        _apply_config_file(parser, subparsers, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _print_resolved(args)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"chebymargin {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
