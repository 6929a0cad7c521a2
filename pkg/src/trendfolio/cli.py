"""Command-line front end.

Exit codes: 0 success, 1 validation or computation failure, 2 usage or
parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import closed_forms as cf
from .errors import SpecError, TrendfolioError, UnknownFigure
from .figures import FIGURES, run_figure
from .market import two_asset_spec
from .moments import (
    WeightMatrix,
    annualize,
    finite_moments,
    portfolio_moments,
    stationary_moments,
    write_moments_csv,
)
from .montecarlo import SimConfig, empirical_sharpe_annualized, simulate, write_paths_csv
from .optimizer import diagonal_mask, optimize, optimize_constrained
from .reporting import fmt, write_csv
from .spec_io import SpecParseError, apply_overrides, load_spec
from .validation import run_validate

TWO_ASSET_KEYS = {"kappa", "nu", "rho_eps", "rho_xi", "beta0", "lambda", "eta", "sigma2"}
SECTOR_KEYS = {"n", "rho_eps", "rho_xi", "beta0", "lambda", "eta"}
FIGURE_KEYS = {"beta0", "lambda", "eta"}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _common(p: argparse.ArgumentParser, spec=True, out_help="output directory"):
    if spec:
        p.add_argument("--spec", help="JSON market specification")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter (repeatable; values are JSON)")
    p.add_argument("--out", help=out_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trendfolio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="virtual-asset mean and covariance")
    _common(p)
    p.add_argument("--horizon", type=_positive, help="finite horizon t (default: stationary)")

    p = sub.add_parser("optimize", help="Sharpe-optimal weight matrix")
    _common(p)
    p.add_argument("--horizon", type=_positive, help="finite horizon t (default: stationary)")
    p.add_argument("--mask", choices=("full", "diagonal"), default="full",
                   help="diagonal forbids lead-lag terms")

    p = sub.add_parser("two-asset", help="closed-form two-asset optima")
    _common(p, spec=False)

    p = sub.add_parser("sector", help="closed-form sector-model optimum and large-n expansion")
    _common(p, spec=False)
    p.add_argument("--regime", choices=cf.REGIMES, help="large-n expansion (default: from correlations)")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the P&L moments")
    _common(p)
    p.add_argument("--paths", type=_positive, default=10_000)
    p.add_argument("--horizon", type=_positive, default=100, help="steps sampled per path after burn-in")
    p.add_argument("--burn-in", type=int, help="default: ceil(10 / min(lambda, eta))")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--weights", default="optimal",
                   help="'optimal', 'diagonal', or a JSON matrix / path to a JSON file")
    p.add_argument("--dump-paths", metavar="CSV", help="write per-step path,t,dpnl rows")

    p = sub.add_parser("figure", help="write the CSV data behind a figure")
    p.add_argument("id", help=f"one of {', '.join(FIGURES)} or 'all'")
    _common(p, spec=False, out_help="output directory (default: figures)")

    p = sub.add_parser("validate", help="run the cross-oracle validation suites")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--paths", type=_positive, help="Monte Carlo paths per case (full level)")
    return parser


def _print_rows(rows):
    for key, value in rows:
        print(f"{key} = {fmt(value)}")


def _write_rows(out, name, rows):
    if out:
        path = write_csv(Path(out) / name, ["quantity", "value"], rows)
        print(f"wrote {path}")


def _moments(spec, horizon):
    return stationary_moments(spec) if horizon is None else finite_moments(spec, horizon)


def cmd_moments(args) -> int:
    spec = load_spec(args.spec, args.overrides)
    ms = _moments(spec, args.horizon)
    print(f"n = {ms.n}, regime = {ms.regime}")
    print("mean[j,k] (signal k on asset j):")
    print(np.array2string(ms.mean, precision=6))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_moments_csv(ms, out / "mean.csv", out / "cov.csv")
        print(f"wrote {out / 'mean.csv'} and {out / 'cov.csv'}")
    return 0


def cmd_optimize(args) -> int:
    spec = load_spec(args.spec, args.overrides)
    ms = _moments(spec, args.horizon)
    res = optimize(ms) if args.mask == "full" else optimize_constrained(ms, diagonal_mask(ms.n))
    print("weights (canonical scaling):")
    print(np.array2string(res.weights.omega, precision=6))
    rows = [("sharpe_sq", res.sharpe_sq), ("sharpe_annualized", res.sharpe_annualized),
            ("kkt_residual", res.kkt_residual)]
    _print_rows(rows)
    if args.out:
        om = res.weights.omega
        path = write_csv(Path(args.out) / "weights.csv", ["j", "k", "value"],
                         ((j, k, om[j, k]) for j in range(ms.n) for k in range(ms.n)))
        print(f"wrote {path}")
    _write_rows(args.out, "optimum.csv", rows)
    return 0


def _two_asset_values(overrides) -> dict:
    vals = {"kappa": 1.0, "nu": 1.0, "rho_eps": 0.0, "rho_xi": 0.0,
            "beta0": 0.1, "lambda": 0.01, "eta": 0.01, "sigma2": 1.0}
    vals = apply_overrides(vals, overrides, TWO_ASSET_KEYS)
    try:
        return {k: float(v) for k, v in vals.items()}
    except (TypeError, ValueError):
        raise SpecParseError("two-asset parameters must be numbers") from None


def cmd_two_asset(args) -> int:
    v = _two_asset_values(args.overrides)
    params = cf.TwoAssetParams.from_values(v["kappa"], v["nu"], v["rho_eps"], v["rho_xi"],
                                           v["beta0"], v["lambda"], v["eta"], v["sigma2"])
    spec = two_asset_spec(v["kappa"], v["nu"], v["rho_eps"], v["rho_xi"],
                          v["beta0"], v["lambda"], v["eta"], v["sigma2"])
    best = optimize(stationary_moments(spec))
    om = best.weights.omega
    rows = [("Q", params.Q), ("R", params.R),
            ("x_opt", om[0, 1] / om[1, 1]), ("z_opt", om[0, 0] / om[1, 1]),
            ("weight_asset1_pct", 100 * om[0, 0] / (om[0, 0] + om[1, 1])),
            ("sharpe_sq_opt", best.sharpe_sq), ("sharpe_annualized_opt", best.sharpe_annualized),
            ("kkt_residual", best.kkt_residual)]
    z0, sh0 = cf.two_asset_no_leadlag_opt(params)
    rows += [("z_no_leadlag", z0), ("sharpe_sq_no_leadlag", sh0), ("gain_vs_no_leadlag", (best.sharpe_sq / sh0) ** 0.5)]
    if v["rho_eps"] == 0 and v["rho_xi"] == 0:
        _, z, sh2 = cf.two_asset_uncorrelated_opt(params)
        rows += [("closed_form_z_opt", z), ("closed_form_sharpe_sq", sh2)]
    if v["kappa"] == 1 and v["nu"] == 1:
        x, sh2 = cf.two_asset_indist_opt(params)
        sh_equal = cf.sharpe_sq_no_leadlag_equal(params)
        rows += [("closed_form_x_opt", x), ("closed_form_sharpe_sq", sh2),
                 ("sharpe_sq_equal_no_leadlag", sh_equal), ("gain", (sh2 / sh_equal) ** 0.5)]
    _print_rows(rows)
    _write_rows(args.out, "two_asset.csv", rows)
    return 0


def cmd_sector(args) -> int:
    vals = apply_overrides({"n": 2, "rho_eps": 0.0, "rho_xi": 0.0, "beta0": 0.1, "lambda": 0.01, "eta": 0.01},
                           args.overrides, SECTOR_KEYS)
    try:
        n = int(vals["n"])
        params = cf.SectorParams.from_values(n, float(vals["rho_eps"]), float(vals["rho_xi"]),
                                             float(vals["beta0"]), float(vals["lambda"]), float(vals["eta"]))
    except (TypeError, ValueError):
        raise SpecParseError("sector parameters must be numbers") from None
    opt = cf.sector_opt(params)
    rows = [("n", n), ("Q", params.Q), ("R", params.R), ("x_opt", opt.x_opt),
            ("total_correction", (n - 1) * opt.x_opt),
            ("sharpe_sq_opt", opt.sharpe_sq_opt), ("sharpe_sq_conventional", opt.sharpe_sq_conventional),
            ("sharpe_annualized_per_asset_opt", annualize(opt.sharpe_sq_opt / n)),
            ("sharpe_annualized_per_asset_conventional", annualize(opt.sharpe_sq_conventional / n)),
            ("gain", opt.gain)]
    try:
        rep = cf.sector_asymptotics(params, args.regime)
    except TrendfolioError as exc:
        if args.regime:
            raise
        print(f"large-n expansion skipped: {exc}")
    else:
        rows += [("asymptotic_regime", rep.regime), ("asymptotic_total_correction", rep.total_correction),
                 ("sharpe_sq_per_asset_limit", rep.sharpe_sq_per_asset_limit)]
    _print_rows(rows)
    _write_rows(args.out, "sector.csv", rows)
    return 0


def _weights(arg, moments):
    if arg == "optimal":
        return optimize(moments).weights
    if arg == "diagonal":
        return optimize_constrained(moments, diagonal_mask(moments.n)).weights
    text = Path(arg).read_text() if Path(arg).is_file() else arg
    try:
        return WeightMatrix.symmetrized(json.loads(text))
    except (json.JSONDecodeError, ValueError) as exc:
        raise SpecParseError(f"cannot parse weights: {exc}") from None


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec, args.overrides)
    ms = stationary_moments(spec)
    w = _weights(args.weights, ms)
    config = SimConfig(spec, args.horizon, args.paths, args.burn_in, args.seed)
    ens = simulate(config, w, workers=args.workers, record=bool(args.dump_paths))
    s = ens.summary()
    mean, var = portfolio_moments(ms, w)
    sh, se = empirical_sharpe_annualized(ens)
    rows = [("paths", args.paths), ("horizon", args.horizon), ("burn_in", config.burn_in), ("seed", args.seed),
            ("mean_empirical", s["mean"]), ("mean_se", s["mean_se"]), ("mean_analytic", mean),
            ("variance_empirical", s["variance"]), ("variance_se", s["variance_se"]), ("variance_analytic", var),
            ("sharpe_annualized_empirical", sh), ("sharpe_annualized_se", se),
            ("sharpe_annualized_analytic", annualize(mean * mean / var) * np.sign(mean))]
    _print_rows(rows)
    _write_rows(args.out, "simulate.csv", rows)
    if args.dump_paths:
        write_paths_csv(ens, args.dump_paths)
        print(f"wrote {args.dump_paths}")
    return 0


def cmd_figure(args) -> int:
    vals = apply_overrides({}, args.overrides, FIGURE_KEYS)
    ids = FIGURES if args.id == "all" else (args.id,)
    for fid in ids:
        for path in run_figure(fid, args.out or "figures", vals):
            print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    report = run_validate(args.level, seed=args.seed, paths=args.paths, emit=print)
    print(report.lines()[-1])
    return 0 if report.passed else 1


COMMANDS = {
    "moments": cmd_moments,
    "optimize": cmd_optimize,
    "two-asset": cmd_two_asset,
    "sector": cmd_sector,
    "simulate": cmd_simulate,
    "figure": cmd_figure,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SpecError, UnknownFigure) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 2
    except TrendfolioError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
