"""Command line interface: ``ellipse-fit {generate,fit,compare,montecarlo,plot}``."""

from __future__ import annotations

import argparse
import math
import sys

from .errors import EllipseFitError
from .geometry import GeometricEllipse
from .harness.io import points_to_csv, read_csv, write_csv
from .harness.simulate import (
    OutlierModel,
    ScenarioConfig,
    compare,
    generate,
    monte_carlo,
    resolve_methods,
)
from .harness.svg import render_svg

DEFAULT_SEED = 20240101


def _ellipse(text: str) -> GeometricEllipse:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected xc,yc,a,b,alpha, got {text!r}") from None
    if len(vals) != 5:
        raise argparse.ArgumentTypeError("expected five comma-separated numbers xc,yc,a,b,alpha")
    if vals[2] <= 0 or vals[3] <= 0:
        raise argparse.ArgumentTypeError("semi-axes must be positive")
    return GeometricEllipse(*vals)


def _add_scenario(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--ellipse", type=_ellipse, default=GeometricEllipse(0.0, 0.0, 24.0, 12.0, 0.0),
                   metavar="XC,YC,A,B,ALPHA", help="ground-truth ellipse (default 0,0,24,12,0)")
    g.add_argument("--n", type=int, default=100, help="number of points (default 100)")
    g.add_argument("--t-min", type=float, default=0.5 * math.pi, help="start of the arc in radians")
    g.add_argument("--t-max", type=float, default=1.5 * math.pi, help="end of the arc in radians")
    g.add_argument("--sigma2", type=float, default=0.25, help="noise variance per coordinate")
    g.add_argument("--outliers", type=int, default=0, help="number of outliers (default 0)")
    g.add_argument("--outlier-model", choices=["offset", "uniform-box"], default="offset")
    g.add_argument("--outlier-min", type=float, default=5.0, help="smallest outlier offset")
    g.add_argument("--outlier-max", type=float, default=15.0, help="largest outlier offset")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")


def _scenario(args) -> ScenarioConfig:
    return ScenarioConfig(
        ellipse=args.ellipse,
        n=args.n,
        t_range=(args.t_min, args.t_max),
        noise_sigma2=args.sigma2,
        outlier=OutlierModel(args.outliers, args.outlier_model, (args.outlier_min, args.outlier_max)),
        seed=args.seed,
    )


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> None:
    pts = generate(_scenario(args))
    if args.output:
        write_csv(pts, args.output)
    else:
        sys.stdout.write(points_to_csv(pts))


def _table(args, methods):
    pts = read_csv(args.input)
    table = compare(pts, methods, truth=args.truth, seed=args.seed)
    return pts, table


def cmd_fit(args) -> None:
    _, table = _table(args, args.method)
    sys.stdout.write(table.to_text(timing=args.timing))
    if args.csv:
        _emit(table.to_csv(timing=args.timing), args.csv)
    failed = [r for r in table.rows if r.error]
    if failed and len(failed) == len(table.rows) - (args.truth is not None):
        raise EllipseFitError("; ".join(f"{r.method}: {r.error}" for r in failed))


def cmd_compare(args) -> None:
    _, table = _table(args, args.methods)
    sys.stdout.write(table.to_text(timing=args.timing))
    if args.csv:
        _emit(table.to_csv(timing=args.timing), args.csv)


def cmd_montecarlo(args) -> None:
    summary = monte_carlo(_scenario(args), args.methods, args.trials, workers=args.workers)
    sys.stdout.write(summary.to_text())
    if args.csv:
        _emit(summary.to_csv(), args.csv)


def cmd_plot(args) -> None:
    pts, table = _table(args, args.methods)
    curves = []
    if args.truth is not None:
        curves.append(("truth", args.truth))
    curves += [(r.method, r.ellipse) for r in table.rows if r.method != "truth" and r.ellipse is not None]
    render_svg(pts, curves, args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ellipse-fit", description="Fit ellipses to noisy 2-D points.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic point set as CSV")
    _add_scenario(p)
    p.add_argument("-o", "--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    def fit_common(p, methods_flag, default):
        p.add_argument("input", help="CSV file with header x,y[,label]")
        p.add_argument(methods_flag, default=default, type=str,
                       help="als, ols, gwls, mest, lmeds or all (comma separated)")
        p.add_argument("--truth", type=_ellipse, metavar="XC,YC,A,B,ALPHA", help="ground truth for errors")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for LMedS subset sampling")

    p = sub.add_parser("fit", help="fit one or more methods to a CSV file")
    fit_common(p, "--method", "als")
    p.add_argument("--csv", help="also write the table as CSV")
    p.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="comparison table of several methods")
    fit_common(p, "--methods", "all")
    p.add_argument("--csv", help="also write the table as CSV")
    p.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("montecarlo", help="repeat a scenario and summarise errors")
    _add_scenario(p)
    p.add_argument("--methods", default="all")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--csv", help="also write the summary as CSV")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("plot", help="SVG plot of points and fitted ellipses")
    fit_common(p, "--methods", "all")
    p.add_argument("-o", "--output", required=True, help="SVG file")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "methods"):
            args.methods = resolve_methods(args.methods)
        if hasattr(args, "method"):
            args.method = resolve_methods(args.method)
        args.func(args)
    except (EllipseFitError, ValueError, OSError) as exc:
        print(f"ellipse-fit: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
