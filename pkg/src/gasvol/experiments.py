"""Monte Carlo experiment harness and the real-data analysis workflow.

Every experiment is a pure function of its configuration: replication
sub-seeds are derived from the master seed, exclusions are counted rather
than hidden, and summaries are computed from the full collected vectors so
aggregation is order-independent.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import write_csv
from .bandwidth import GLOBAL, bandwidth_plan, support_bounds
from .errors import DataError, ExperimentError, GasvolError
from .garch import conditional_variance_oracle, write_oracle_csv
from .inference import confidence_band, symmetry_test
from .kernels import ReturnSeries, design_pairs, local_linear_fit
from .mle import fit_garch_mle, mle_sigma2_curve
from .pilot import fit_pilot
from .simulate import (Garch11, ModelSpec, SimSpec, model_name, simulate,
                       substream_seed, true_sigma2)

GAS = "gas"
GLOBAL_BANDWIDTH = "global"
MLE = "mle"
_KNOWN_ESTIMATORS = (GAS, GLOBAL_BANDWIDTH, MLE)

#: Replication failures beyond this fraction abort an experiment.
MAX_EXCLUSION_FRACTION = 0.10


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of a Monte Carlo run; desk-scale by default."""

    model: ModelSpec
    n_list: tuple = (500, 1000)
    replications: int = 100
    n_x: int = 20
    alpha: float = 0.01
    seed: int = 0
    estimators: tuple = (GAS, MLE)
    output_dir: str | None = None
    a_config: object = GLOBAL
    symmetry_a: object = None
    fixed_points: bool = False
    pilot_d_candidates: tuple = (1, 2, 3)
    pilot_restarts: int = 2
    oracle_paths: int = 1_000_000

    def __post_init__(self):
        if self.replications < 1:
            raise ExperimentError("replications must be at least 1")
        if self.n_x < 2:
            raise ExperimentError("n_x must be at least 2")
        if not self.estimators:
            raise ExperimentError("estimators must be non-empty")
        for est in self.estimators:
            if est not in _KNOWN_ESTIMATORS:
                raise ExperimentError(f"unknown estimator {est!r}; "
                                      f"choose from {_KNOWN_ESTIMATORS}")


@dataclass(frozen=True)
class IseRow:
    """Integrated squared error summary for one (model, n, estimator) cell."""

    model: str
    n: int
    estimator: str
    mise: float
    medise: float
    sdise: float
    mise_times_n: float
    medise_times_n: float
    sdise_times_n: float
    included: int
    excluded: int
    seed: int


@dataclass(frozen=True)
class IseSummary:
    rows: tuple
    exclusion_log: tuple

    def cell(self, n: int, estimator: str) -> IseRow:
        for row in self.rows:
            if row.n == n and row.estimator == estimator:
                return row
        raise KeyError((n, estimator))


def _truth_function(cfg: ExperimentConfig):
    """Closed-form variance function, or the Monte Carlo tabulation for GARCH."""
    if isinstance(cfg.model, Garch11):
        table = conditional_variance_oracle(
            cfg.model.params, mc_paths=cfg.oracle_paths,
            seed=substream_seed(cfg.seed, 0xACE))
        return table.interpolator(), table
    model = cfg.model

    def truth(points):
        return np.asarray(true_sigma2(model, points), dtype=float)

    return truth, None


def _fit_pipeline(cfg: ExperimentConfig, pairs, rep_seed: int):
    net, report = fit_pilot(pairs, d_candidates=cfg.pilot_d_candidates,
                            restarts=cfg.pilot_restarts, seed=rep_seed)
    return net, report.m4eps


def _gas_values(cfg, pairs, net, m4eps, points, a_config):
    values = np.empty(len(points))
    shared = None
    for j, x in enumerate(points):
        if a_config == GLOBAL:
            if shared is None:
                shared = bandwidth_plan(pairs, net, m4eps, float(x), a=GLOBAL)
            plan = shared
        else:
            plan = bandwidth_plan(pairs, net, m4eps, float(x), a=a_config)
        values[j] = local_linear_fit(pairs, float(x), plan.h_hat)
    return values


def run_ise_experiment(cfg: ExperimentConfig, estimator_overrides=None) -> IseSummary:
    """Integrated squared error of each estimator against the true variance.

    Per replication, ``n_x`` evaluation points are drawn uniformly over the
    central 98% of that replication's sample (or frozen across replications
    with ``fixed_points``); the ISE is the mean squared gap to the truth
    over those points.  Replications where any estimator fails are excluded
    and logged; more than 10% exclusions abort the experiment.

    ``estimator_overrides`` is a test hook mapping estimator names to
    callables ``(series, points) -> values``.
    """
    truth, oracle_table = _truth_function(cfg)
    overrides = estimator_overrides or {}
    rows = []
    exclusion_log = []
    for n in cfg.n_list:
        ise_values = {est: [] for est in cfg.estimators}
        excluded = 0
        frozen_points = None
        for rep in range(cfg.replications):
            rep_seed = substream_seed(cfg.seed, n, rep)
            series = simulate(SimSpec(model=cfg.model, n=n, seed=rep_seed))
            pairs = design_pairs(series)
            rng = np.random.default_rng(substream_seed(cfg.seed, n, rep, 1))
            lo, hi = support_bounds(pairs)
            if cfg.fixed_points:
                if frozen_points is None:
                    frozen_points = rng.uniform(lo, hi, size=cfg.n_x)
                points = frozen_points
            else:
                points = rng.uniform(lo, hi, size=cfg.n_x)
            target = truth(points)
            try:
                rep_values = {}
                needs_pilot = any(est in (GAS, GLOBAL_BANDWIDTH) and est not in overrides
                                  for est in cfg.estimators)
                if needs_pilot:
                    net, m4eps = _fit_pipeline(cfg, pairs, substream_seed(cfg.seed, n, rep, 2))
                for est in cfg.estimators:
                    if est in overrides:
                        rep_values[est] = np.asarray(overrides[est](series, points), dtype=float)
                    elif est == GAS:
                        rep_values[est] = _gas_values(cfg, pairs, net, m4eps, points,
                                                      cfg.a_config)
                    elif est == GLOBAL_BANDWIDTH:
                        rep_values[est] = _gas_values(cfg, pairs, net, m4eps, points, GLOBAL)
                    elif est == MLE:
                        fit = fit_garch_mle(series, seed=substream_seed(cfg.seed, n, rep, 3))
                        rep_values[est] = mle_sigma2_curve(fit, points)
            except GasvolError as exc:
                excluded += 1
                exclusion_log.append((model_name(cfg.model), n, rep, str(exc)))
                continue
            for est, values in rep_values.items():
                ise_values[est].append(float(np.mean((values - target) ** 2)))

        if excluded > MAX_EXCLUSION_FRACTION * cfg.replications:
            raise ExperimentError(
                f"{excluded} of {cfg.replications} replications failed at n={n}; "
                f"exceeds the {MAX_EXCLUSION_FRACTION:.0%} exclusion cap")
        included = cfg.replications - excluded
        for est in cfg.estimators:
            ise = np.asarray(ise_values[est])
            mise = float(np.mean(ise))
            medise = float(np.median(ise))
            sdise = float(np.std(ise, ddof=1)) if ise.size > 1 else 0.0
            rows.append(IseRow(
                model=model_name(cfg.model), n=n, estimator=est,
                mise=mise, medise=medise, sdise=sdise,
                mise_times_n=mise * n, medise_times_n=medise * n,
                sdise_times_n=sdise * n,
                included=included, excluded=excluded, seed=cfg.seed))

    summary = IseSummary(rows=tuple(rows), exclusion_log=tuple(exclusion_log))
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        write_csv(out / "ise_summary.csv",
                  ["model", "n", "estimator", "included", "excluded",
                   "mise", "medise", "sdise",
                   "mise_times_n", "medise_times_n", "sdise_times_n", "seed"],
                  [[r.model, r.n, r.estimator, r.included, r.excluded,
                    r.mise, r.medise, r.sdise,
                    r.mise_times_n, r.medise_times_n, r.sdise_times_n, r.seed]
                   for r in summary.rows])
        if oracle_table is not None:
            write_oracle_csv(oracle_table, out / "garch_truth_table.csv")
        _write_exclusions(out / "exclusions.csv", summary.exclusion_log)
    return summary


@dataclass(frozen=True)
class SymmetryRow:
    model: str
    n: int
    included: int
    excluded: int
    rejections: int
    reject_rate: float
    alpha: float
    n_x: int
    seed: int


@dataclass(frozen=True)
class SymmetryExperimentResult:
    rows: tuple
    exclusion_log: tuple

    def rate(self, n: int) -> float:
        for row in self.rows:
            if row.n == n:
                return row.reject_rate
        raise KeyError(n)


def run_symmetry_experiment(cfg: ExperimentConfig) -> SymmetryExperimentResult:
    """Rejection frequency of the symmetry test per (model, n)."""
    rows = []
    exclusion_log = []
    for n in cfg.n_list:
        rejections = 0
        excluded = 0
        for rep in range(cfg.replications):
            rep_seed = substream_seed(cfg.seed, n, rep)
            series = simulate(SimSpec(model=cfg.model, n=n, seed=rep_seed))
            pairs = design_pairs(series)
            try:
                net, m4eps = _fit_pipeline(cfg, pairs, substream_seed(cfg.seed, n, rep, 2))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    result = symmetry_test(pairs, net, m4eps, n_x=cfg.n_x,
                                           alpha=cfg.alpha, a=cfg.symmetry_a)
            except GasvolError as exc:
                excluded += 1
                exclusion_log.append((model_name(cfg.model), n, rep, str(exc)))
                continue
            rejections += int(result.reject)
        if excluded > MAX_EXCLUSION_FRACTION * cfg.replications:
            raise ExperimentError(
                f"{excluded} of {cfg.replications} replications failed at n={n}; "
                f"exceeds the {MAX_EXCLUSION_FRACTION:.0%} exclusion cap")
        included = cfg.replications - excluded
        rows.append(SymmetryRow(
            model=model_name(cfg.model), n=n, included=included, excluded=excluded,
            rejections=rejections, reject_rate=rejections / included,
            alpha=cfg.alpha, n_x=cfg.n_x, seed=cfg.seed))

    result = SymmetryExperimentResult(rows=tuple(rows), exclusion_log=tuple(exclusion_log))
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        write_csv(out / "symmetry_rates.csv",
                  ["model", "n", "included", "excluded", "rejections",
                   "reject_rate", "alpha", "n_x", "seed"],
                  [[r.model, r.n, r.included, r.excluded, r.rejections,
                    r.reject_rate, r.alpha, r.n_x, r.seed] for r in result.rows])
        _write_exclusions(out / "exclusions.csv", result.exclusion_log)
    return result


def _write_exclusions(path, log):
    write_csv(path, ["model", "n", "replication", "reason"],
              [[m, n, rep, reason] for m, n, rep, reason in log])


@dataclass(frozen=True)
class AnalyzeConfig:
    """Configuration of the real-data workflow."""

    a: float = 0.089
    alpha: float = 0.05
    n_grid: int = 100
    coverage_points: int = 100
    seed: int = 0
    pilot_d_candidates: tuple = (1, 2, 3)
    pilot_restarts: int = 2
    bias_correction: bool = False
    output_dir: str | None = None


@dataclass
class AnalyzeResult:
    gas_band: object
    global_band: object
    gas_coverage: float | None
    global_coverage: float | None
    coverage_count: int
    files: list


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


def analyze_returns(returns_csv, cfg: AnalyzeConfig = AnalyzeConfig(),
                    realized_csv=None) -> AnalyzeResult:
    """Estimate the variance function of an observed return series.

    Emits confidence-banded curves for the adaptive (user-width) and global
    bandwidth variants.  When a realized-volatility proxy aligned row-by-row
    with the returns is supplied, each proxy value at row t is paired with
    the previous return (the variance function's argument) and the fraction
    of proxy points inside each band is reported.
    """
    from .simulate import read_series_csv

    series = read_series_csv(returns_csv)
    pairs = design_pairs(series)
    proxy = None
    if realized_csv is not None:
        proxy_values = _read_single_column(realized_csv)
        if proxy_values.size != series.n:
            raise DataError(
                f"realized-volatility proxy has {proxy_values.size} rows but the "
                f"return series has {series.n}")
        proxy = proxy_values

    net, report = fit_pilot(pairs, d_candidates=cfg.pilot_d_candidates,
                            restarts=cfg.pilot_restarts, seed=cfg.seed)
    m4eps = report.m4eps

    lo, hi = support_bounds(pairs)
    grid = np.linspace(lo, hi, cfg.n_grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gas_band = confidence_band(pairs, net, m4eps, grid, a=cfg.a, alpha=cfg.alpha,
                                   bias_correction=cfg.bias_correction)
        global_band = confidence_band(pairs, net, m4eps, grid, a=GLOBAL, alpha=cfg.alpha,
                                      bias_correction=cfg.bias_correction)

    gas_cov = global_cov = None
    cov_count = 0
    if proxy is not None:
        x_points = series.values[:-1]
        y_points = proxy[1:]
        idx = np.arange(x_points.size)
        if idx.size > cfg.coverage_points:
            rng = np.random.default_rng(substream_seed(cfg.seed, 0xC0))
            idx = np.sort(rng.choice(idx, size=cfg.coverage_points, replace=False))
        xs = x_points[idx]
        ys = y_points[idx]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            gas_at = confidence_band(pairs, net, m4eps, xs, a=cfg.a, alpha=cfg.alpha,
                                     bias_correction=cfg.bias_correction)
            global_at = confidence_band(pairs, net, m4eps, xs, a=GLOBAL, alpha=cfg.alpha,
                                        bias_correction=cfg.bias_correction)
        gas_cov = _coverage(gas_at, ys)
        global_cov = _coverage(global_at, ys)
        cov_count = int(ys.size)

    files = []
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        header = ["x", "h", "sigma2", "bias_correction", "lower", "upper", "error"]
        files.append(write_csv(out / "gas_band.csv", header, _band_rows(gas_band)))
        files.append(write_csv(out / "global_band.csv", header, _band_rows(global_band)))
        if proxy is not None:
            files.append(write_csv(
                out / "coverage.csv",
                ["method", "points", "coverage"],
                [["gas", cov_count, gas_cov], ["global", cov_count, global_cov]]))
    return AnalyzeResult(gas_band=gas_band, global_band=global_band,
                         gas_coverage=gas_cov, global_coverage=global_cov,
                         coverage_count=cov_count, files=files)


def _coverage(band, targets) -> float:
    ok = np.isfinite(band.lower) & np.isfinite(band.upper)
    if not np.any(ok):
        return float("nan")
    inside = (targets[ok] >= band.lower[ok]) & (targets[ok] <= band.upper[ok])
    return float(np.mean(inside))


def _read_single_column(path) -> np.ndarray:
    """Single numeric column with optional header; errors carry line numbers."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty CSV")
    values = []
    start = 0
    first = [c.strip() for c in rows[0] if c.strip() != ""]
    if len(first) == 1:
        try:
            float(first[0])
        except ValueError:
            start = 1
    for lineno, row in enumerate(rows[start:], start=start + 1):
        cells = [c.strip() for c in row if c.strip() != ""]
        if not cells:
            continue
        if len(cells) != 1:
            raise DataError(f"{path}: line {lineno}: expected a single column")
        try:
            values.append(float(cells[0]))
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a number: {cells[0]!r}") from None
    if not values:
        raise DataError(f"{path}: no numeric rows")
    return np.asarray(values)
