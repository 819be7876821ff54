"""GARCH(1,1) parameters and their nonlinear one-lag representation.

A stationary GARCH(1,1) with symmetric innovations admits an exact
representation as a one-lag conditionally heteroskedastic model whose
variance function is ``sigma2(x) = sigma2_zero + (alpha1 + beta) *
coef_ratio(x) * x**2``.  The coefficient ratio has no closed form, so this
module tabulates the conditional variance by brute-force Monte Carlo
(narrow-window conditional averaging on a long simulated path) and exposes
the innovation transform behind the construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EstimationError


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) coefficients with stationarity and positivity enforced."""

    alpha0: float
    alpha1: float
    beta: float

    def __post_init__(self):
        if not (self.alpha0 > 0 and math.isfinite(self.alpha0)):
            raise ConfigError(f"alpha0 must be positive, got {self.alpha0!r}")
        if not (self.alpha1 > 0 and math.isfinite(self.alpha1)):
            raise ConfigError(f"alpha1 must be positive, got {self.alpha1!r}")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ConfigError(f"beta must be non-negative, got {self.beta!r}")
        if not self.alpha1 + self.beta < 1:
            raise ConfigError(
                f"stationarity requires alpha1 + beta < 1, got "
                f"{self.alpha1 + self.beta!r}")

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta

    @property
    def unconditional_variance(self) -> float:
        return self.alpha0 / (1.0 - self.alpha1 - self.beta)

    @property
    def sigma2_zero(self) -> float:
        """Conditional variance given a zero lagged return."""
        return self.alpha0 + self.zero_excess

    @property
    def zero_excess(self) -> float:
        """Excess of the zero-point variance over alpha0: beta times the
        stationary variance."""
        return self.beta * self.unconditional_variance


def transformed_innovation(eps, params: GarchParams):
    """Map a unit-variance innovation onto the one-lag representation scale.

    ``sign(e) * sqrt((alpha1 e^2 + beta) / (alpha1 + beta))``; the sign of 0
    is 0, so a zero innovation maps to 0.  The square of the output is an
    affine function of the square of the input and has unit mean.
    """
    eps = np.asarray(eps, dtype=float)
    out = np.sign(eps) * np.sqrt((params.alpha1 * eps ** 2 + params.beta)
                                 / (params.alpha1 + params.beta))
    if out.ndim == 0:
        return float(out)
    return out


def innovation_correction(eps_tilde, params: GarchParams):
    """Multiplicative variance correction ``1 + beta/alpha1 (1 - 1/e^2)``.

    Defined for nonzero transformed innovations; equals 1 when |e| = 1 and
    tends to 1 + beta/alpha1 as |e| grows.
    """
    arr = np.asarray(eps_tilde, dtype=float)
    if np.any(arr == 0.0):
        raise ValueError("innovation correction is undefined at 0")
    out = 1.0 + params.beta / params.alpha1 * (1.0 - 1.0 / arr ** 2)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ConditionalVarianceTable:
    """Monte Carlo tabulation of E[X_t^2 | X_{t-1} = x] on a grid.

    ``sigma2_zero`` and ``zero_excess`` are the closed-form constants of the
    one-lag representation; ``coef_ratio`` is the implied ratio of the local
    quadratic coefficient to alpha1 + beta (NaN at x = 0), and ``flagged``
    marks cells whose window never reached the requested sample count.
    """

    params: GarchParams
    sigma2_zero: float
    zero_excess: float
    x: np.ndarray
    sigma2: np.ndarray
    se: np.ndarray
    count: np.ndarray
    flagged: np.ndarray
    coef_ratio: np.ndarray
    seed: int
    path_points: int

    def interpolator(self):
        """Linear interpolation of the tabulated variance over unflagged cells."""
        ok = ~self.flagged & np.isfinite(self.sigma2)
        if int(np.count_nonzero(ok)) < 2:
            raise EstimationError("too few reliable cells to interpolate the oracle table")
        xs = self.x[ok]
        ys = self.sigma2[ok]

        def interp(points):
            return np.interp(np.asarray(points, dtype=float), xs, ys)

        return interp


MIN_ORACLE_PATH = 100_000


def conditional_variance_oracle(params: GarchParams, x_grid=None,
                                mc_paths: int = 1_000_000, seed: int = 0,
                                burn_in: int = 500, min_cell_count: int = 500,
                                base_window_frac: float = 0.02) -> ConditionalVarianceTable:
    """Tabulate the one-lag conditional variance of a GARCH(1,1) by simulation.

    A single path of ``mc_paths`` points is simulated and, for every grid
    point, E[X_t^2 | X_{t-1} near x] is estimated by averaging squared
    responses whose lagged value falls in a narrow window.  The window starts
    at ``base_window_frac`` sample standard deviations and widens until it
    holds ``min_cell_count`` samples; cells that never fill are flagged, not
    fabricated.  Deterministic given the seed.
    """
    from .simulate import Garch11, SimSpec, simulate

    if mc_paths < MIN_ORACLE_PATH:
        raise ConfigError(f"mc_paths must be at least {MIN_ORACLE_PATH} for tabulation")
    series = simulate(SimSpec(model=Garch11(params), n=int(mc_paths),
                              burn_in=int(burn_in), seed=int(seed)))
    reg = series.values[:-1]
    resp = series.values[1:] ** 2

    order = np.argsort(reg, kind="stable")
    reg_sorted = reg[order]
    resp_sorted = resp[order]
    cum = np.concatenate(([0.0], np.cumsum(resp_sorted)))
    cum2 = np.concatenate(([0.0], np.cumsum(resp_sorted ** 2)))

    if x_grid is None:
        lo, hi = np.percentile(reg, [0.1, 99.9])
        x_grid = np.linspace(lo, hi, 161)
    x_grid = np.asarray(x_grid, dtype=float)

    sd = float(np.std(reg))
    span = float(reg_sorted[-1] - reg_sorted[0])
    max_width = span / 2.0

    sigma2 = np.full(x_grid.shape, np.nan)
    se = np.full(x_grid.shape, np.nan)
    count = np.zeros(x_grid.shape, dtype=int)
    flagged = np.zeros(x_grid.shape, dtype=bool)
    for j, xj in enumerate(x_grid):
        width = max(base_window_frac * sd, 1e-12)
        while True:
            lo_i = int(np.searchsorted(reg_sorted, xj - width / 2.0, side="left"))
            hi_i = int(np.searchsorted(reg_sorted, xj + width / 2.0, side="right"))
            c = hi_i - lo_i
            if c >= min_cell_count or width >= max_width:
                break
            width *= 1.5
        count[j] = c
        flagged[j] = c < min_cell_count
        if c >= 2:
            mean = (cum[hi_i] - cum[lo_i]) / c
            var = max((cum2[hi_i] - cum2[lo_i]) / c - mean * mean, 0.0)
            sigma2[j] = mean
            se[j] = math.sqrt(var / c)

    a0_plus = params.sigma2_zero
    with np.errstate(divide="ignore", invalid="ignore"):
        coef_ratio = (sigma2 - a0_plus) / (params.persistence * x_grid ** 2)
    coef_ratio = np.where(x_grid == 0.0, np.nan, coef_ratio)

    return ConditionalVarianceTable(
        params=params, sigma2_zero=a0_plus, zero_excess=params.zero_excess,
        x=x_grid, sigma2=sigma2, se=se, count=count, flagged=flagged,
        coef_ratio=coef_ratio, seed=int(seed), path_points=int(mc_paths))


def write_oracle_csv(table: ConditionalVarianceTable, path) -> None:
    """Export an oracle table as CSV (x, sigma2, se, count, flagged, coef_ratio)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "sigma2", "se", "count", "flagged", "coef_ratio"])
        for j in range(table.x.size):
            writer.writerow([
                repr(float(table.x[j])), repr(float(table.sigma2[j])),
                repr(float(table.se[j])), int(table.count[j]),
                int(table.flagged[j]), repr(float(table.coef_ratio[j])),
            ])


@dataclass(frozen=True)
class NewsImpactCurves:
    """Paired nonparametric news impact curves on a common grid.

    ``garch`` is fitted to a GARCH(1,1) path and ``baseline`` to a one-lag
    ARCH path with the same persistence driven by transformed innovations;
    the gap between the two curves is the footprint of the coefficient
    ratio, and both share the minimum location at zero.
    """

    params: GarchParams
    grid: np.ndarray
    garch: "object"
    baseline: "object"


def news_impact_comparison(params: GarchParams, series_len: int, seed: int = 0,
                           n_grid: int = 41, a=None, alpha: float = 0.05,
                           d_candidates=(1, 2, 3), restarts: int = 2) -> NewsImpactCurves:
    """Fit the estimation pipeline to paired GARCH and transformed-ARCH paths.

    Returns confidence-banded variance curves evaluated on a common grid
    spanning the overlap of the two samples' central ranges.
    """
    from .bandwidth import GLOBAL, support_bounds
    from .inference import confidence_band
    from .kernels import design_pairs
    from .pilot import fit_pilot
    from .simulate import ArchEpsTilde, Garch11, SimSpec, simulate, substream_seed

    if a is None:
        a = GLOBAL
    curves = []
    bounds = []
    specs = [Garch11(params), ArchEpsTilde(params)]
    for idx, model in enumerate(specs):
        series = simulate(SimSpec(model=model, n=int(series_len),
                                  seed=substream_seed(seed, idx)))
        pairs = design_pairs(series)
        net, report = fit_pilot(pairs, d_candidates=d_candidates, restarts=restarts,
                                seed=substream_seed(seed, idx, 1))
        curves.append((pairs, net, report.m4eps))
        bounds.append(support_bounds(pairs))

    lo = max(b[0] for b in bounds)
    hi = min(b[1] for b in bounds)
    if not hi > lo:
        raise EstimationError("simulated paths share no overlapping support")
    grid = np.linspace(lo, hi, int(n_grid))

    bands = [confidence_band(pairs, net, m4, grid, a=a, alpha=alpha)
             for pairs, net, m4 in curves]
    return NewsImpactCurves(params=params, grid=grid, garch=bands[0], baseline=bands[1])
