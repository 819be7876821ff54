"""Command-line surface: simulation, estimation, inference and experiments.

Every subcommand writes CSV outputs plus a key=value run manifest to the
output directory.  Exit codes: 0 on success, 1 on usage errors, 2 on runtime
failures.  All randomness is controlled by --seed, and a rerun with the same
flags produces byte-identical files.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from ._io import write_csv, write_manifest
from .bandwidth import GLOBAL, LOCAL
from .errors import GasvolError
from .experiments import (AnalyzeConfig, ExperimentConfig, analyze_returns,
                          run_ise_experiment, run_symmetry_experiment)
from .garch import GarchParams, news_impact_comparison
from .inference import confidence_band, symmetry_test
from .kernels import design_pairs
from .mle import fit_garch_mle
from .pilot import fit_pilot
from .simulate import (HT, Arch1, ArchEpsTilde, Garch11, SimSpec, model_name,
                       read_series_csv, simulate, write_series_csv)

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _width(text: str):
    if text in (GLOBAL, LOCAL):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a positive number, 'global' or 'local', got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError("interval width must be positive")
    return value


def _model_from_args(args) -> object:
    name = args.model
    if name == "arch1":
        return Arch1(alpha0=args.a0, alpha1=args.a1)
    if name == "garch":
        return Garch11(GarchParams(alpha0=args.a0, alpha1=args.a1, beta=args.beta))
    if name == "ht":
        return HT()
    if name == "arch-eps":
        return ArchEpsTilde(GarchParams(alpha0=args.a0, alpha1=args.a1, beta=args.beta))
    raise GasvolError(f"unknown model {name!r}")


def _add_model_flags(parser):
    parser.add_argument("--model", required=True,
                        choices=["arch1", "garch", "ht", "arch-eps"])
    parser.add_argument("--a0", type=float, default=0.1)
    parser.add_argument("--a1", type=float, default=0.3)
    parser.add_argument("--beta", type=float, default=0.2)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")


def _add_pilot_flags(parser):
    parser.add_argument("--pilot-sizes", default="1,2,3",
                        help="comma-separated hidden-unit candidates")
    parser.add_argument("--pilot-restarts", type=int, default=2)


def _pilot_kwargs(args):
    sizes = tuple(int(s) for s in str(args.pilot_sizes).split(",") if s.strip())
    return {"d_candidates": sizes, "restarts": args.pilot_restarts}


def _manifest_entries(args) -> dict:
    entries = {"version": __version__}
    for key, value in sorted(vars(args).items()):
        if key in ("func",):
            continue
        entries[key] = value
    return entries


def _finish(args, files):
    out = Path(args.out)
    entries = _manifest_entries(args)
    entries["outputs"] = ",".join(sorted(Path(f).name for f in files))
    manifest = write_manifest(out / f"{args.command}_manifest.txt", entries)
    for f in list(files) + [manifest]:
        print(f)
    return 0


def _band_rows(band):
    rows = []
    for j, x in enumerate(band.grid):
        plan = band.plans[j]
        rows.append([
            float(x),
            float(plan.h_hat) if plan is not None else float("nan"),
            float(band.estimate[j]), float(band.bias_correction[j]),
            float(band.lower[j]), float(band.upper[j]),
            band.errors[j] or "",
        ])
    return rows


def _cmd_simulate(args):
    model = _model_from_args(args)
    series = simulate(SimSpec(model=model, n=args.n, burn_in=args.burn_in,
                              seed=args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{model_name(model)}_returns.csv"
    write_series_csv(path, series)
    return _finish(args, [path])


def _load_pipeline(args):
    series = read_series_csv(args.infile)
    pairs = design_pairs(series)
    net, report = fit_pilot(pairs, seed=args.seed, **_pilot_kwargs(args))
    return series, pairs, net, report


def _cmd_estimate(args):
    series, pairs, net, report = _load_pipeline(args)
    lo, hi = np.percentile(pairs.regressor, [1.0, 99.0])
    grid = np.linspace(lo, hi, args.grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        band = confidence_band(pairs, net, report.m4eps, grid, a=args.a,
                               alpha=0.05, bias_correction=False)
    path = write_csv(Path(args.out) / "volatility_curve.csv",
                     ["x", "h", "sigma2"],
                     [[float(x),
                       float(band.plans[j].h_hat) if band.plans[j] else float("nan"),
                       float(band.estimate[j])]
                      for j, x in enumerate(band.grid)])
    return _finish(args, [path])


def _cmd_bands(args):
    series, pairs, net, report = _load_pipeline(args)
    lo, hi = np.percentile(pairs.regressor, [1.0, 99.0])
    grid = np.linspace(lo, hi, args.grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        band = confidence_band(pairs, net, report.m4eps, grid, a=args.a,
                               alpha=args.alpha,
                               bias_correction=not args.no_bias_correction)
    path = write_csv(Path(args.out) / "volatility_band.csv",
                     ["x", "h", "sigma2", "bias_correction", "lower", "upper", "error"],
                     _band_rows(band))
    return _finish(args, [path])


def _cmd_symtest(args):
    series, pairs, net, report = _load_pipeline(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = symmetry_test(pairs, net, report.m4eps, n_x=args.nx,
                               alpha=args.alpha, a=args.a)
    rows = [[x_pos, float(t), result.critical_value, bool(e), result.reject]
            for (x_neg, x_pos), t, e in zip(result.points, result.statistics,
                                            result.exceeds)]
    path = write_csv(Path(args.out) / "symmetry_test.csv",
                     ["x", "t_stat", "critical_value", "pair_exceeds", "reject"],
                     rows)
    return _finish(args, [path])


def _cmd_nic(args):
    params = GarchParams(alpha0=args.a0, alpha1=args.a1, beta=args.beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        curves = news_impact_comparison(params, series_len=args.n, seed=args.seed,
                                        n_grid=args.grid, **_pilot_kwargs(args))
    rows = []
    for j, x in enumerate(curves.grid):
        rows.append([float(x),
                     float(curves.garch.estimate[j]),
                     float(curves.garch.lower[j]), float(curves.garch.upper[j]),
                     float(curves.baseline.estimate[j]),
                     float(curves.baseline.lower[j]), float(curves.baseline.upper[j])])
    path = write_csv(Path(args.out) / "news_impact_curves.csv",
                     ["x", "garch_sigma2", "garch_lower", "garch_upper",
                      "baseline_sigma2", "baseline_lower", "baseline_upper"],
                     rows)
    return _finish(args, [path])


def _cmd_mle(args):
    series = read_series_csv(args.infile)
    fit = fit_garch_mle(series, seed=args.seed)
    path = write_csv(Path(args.out) / "garch_mle_fit.csv",
                     ["alpha0", "alpha1", "beta", "loglik", "converged",
                      "iterations", "n"],
                     [[fit.params.alpha0, fit.params.alpha1, fit.params.beta,
                       fit.loglik, fit.converged, fit.iterations, series.n]])
    return _finish(args, [path])


def _experiment_config(args) -> ExperimentConfig:
    n_list = tuple(int(s) for s in str(args.n_list).split(",") if s.strip())
    return ExperimentConfig(
        model=_model_from_args(args), n_list=n_list, replications=args.reps,
        n_x=args.nx, alpha=args.alpha, seed=args.seed,
        estimators=tuple(s.strip() for s in args.estimators.split(",") if s.strip()),
        output_dir=args.out,
        pilot_d_candidates=tuple(int(s) for s in str(args.pilot_sizes).split(",")
                                 if s.strip()),
        pilot_restarts=args.pilot_restarts,
        fixed_points=args.fixed_points,
        oracle_paths=args.oracle_paths,
    )


def _cmd_mc_ise(args):
    cfg = _experiment_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run_ise_experiment(cfg)
    files = [Path(args.out) / "ise_summary.csv", Path(args.out) / "exclusions.csv"]
    return _finish(args, [f for f in files if f.exists()])


def _cmd_mc_sym(args):
    cfg = _experiment_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run_symmetry_experiment(cfg)
    files = [Path(args.out) / "symmetry_rates.csv", Path(args.out) / "exclusions.csv"]
    return _finish(args, [f for f in files if f.exists()])


def _cmd_analyze(args):
    cfg = AnalyzeConfig(a=args.a, alpha=args.alpha, n_grid=args.grid,
                        coverage_points=args.coverage_points, seed=args.seed,
                        bias_correction=not args.no_bias_correction,
                        output_dir=args.out)
    result = analyze_returns(args.infile, cfg, realized_csv=args.rv)
    return _finish(args, result.files)


def build_parser() -> _Parser:
    parser = _Parser(prog="gasvol",
                     description="Nonparametric volatility estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[], help="simulate a benchmark model")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=500)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="variance curve from a returns CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--a", type=_width, default=GLOBAL)
    p.add_argument("--grid", type=int, default=50)
    _add_pilot_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("bands", help="variance curve with confidence bands")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--a", type=_width, default=GLOBAL)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--no-bias-correction", action="store_true")
    _add_pilot_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_bands)

    p = sub.add_parser("symtest", help="Bonferroni symmetry test")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--nx", type=int, default=20)
    p.add_argument("--a", type=_width, default=None)
    _add_pilot_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_symtest)

    p = sub.add_parser("nic", help="paired news impact curves")
    p.add_argument("--a0", type=float, default=0.1)
    p.add_argument("--a1", type=float, default=0.3)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--grid", type=int, default=41)
    _add_pilot_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_nic)

    p = sub.add_parser("mle", help="GARCH(1,1) quasi-maximum-likelihood fit")
    p.add_argument("--in", dest="infile", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_mle)

    for name, func, default_estimators in (
            ("mc-ise", _cmd_mc_ise, "gas,mle"),
            ("mc-sym", _cmd_mc_sym, "gas")):
        p = sub.add_parser(name, help=f"Monte Carlo experiment ({name})")
        _add_model_flags(p)
        p.add_argument("--n-list", default="500,1000")
        p.add_argument("--reps", type=int, default=100)
        p.add_argument("--nx", type=int, default=20)
        p.add_argument("--alpha", type=float, default=0.01)
        p.add_argument("--estimators", default=default_estimators)
        p.add_argument("--fixed-points", action="store_true")
        p.add_argument("--oracle-paths", type=int, default=1_000_000)
        _add_pilot_flags(p)
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="real-data workflow on a returns CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--rv", default=None, help="aligned realized-volatility CSV")
    p.add_argument("--a", type=float, default=0.089)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--coverage-points", type=int, default=100)
    p.add_argument("--no-bias-correction", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GasvolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
