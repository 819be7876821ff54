"""Plug-in bandwidth construction from interval functionals.

The bandwidth for the local linear variance estimator is
``h = (v / (4 n b))**(1/5)`` where ``b`` and ``v`` are curvature (bias) and
variance functionals estimated over an interval around the evaluation point.
A wide interval covering the sample support produces one global bandwidth;
narrow intervals make the bandwidth track local curvature and noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, EstimationError
from .kernels import EPANECHNIKOV, DesignPairs, KernelSpec

#: Width directives accepted wherever an interval width is configured.
GLOBAL = "global"
LOCAL = "local"

# Interval-occupancy fallback: widen a sparsely populated interval a few
# times before failing.
MIN_INTERVAL_POINTS = 10
INTERVAL_GROWTH = 1.5
MAX_INTERVAL_GROWTHS = 10

# Curvature below this level makes the plug-in rule blow up; the bandwidth
# is then capped at a quarter of the regressor range and the plan flagged.
FLAT_CURVATURE_THRESHOLD = 1e-10

#: The sample-range quantile pair that defines the "global" interval.
GLOBAL_QUANTILES = (1.0, 99.0)

#: Default width multiplier for the LOCAL directive: 1.5 * std(X) * n^(-1/5).
LOCAL_WIDTH_MULTIPLIER = 1.5


@dataclass(frozen=True)
class IntervalWindow:
    """A centered interval with its functional-evaluation grid size."""

    center: float
    width: float
    n_star: int

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigError(f"interval width must be positive, got {self.width!r}")
        if self.n_star < 10:
            raise ConfigError("n_star must be at least 10")

    @property
    def lo(self) -> float:
        return self.center - self.width / 2.0

    @property
    def hi(self) -> float:
        return self.center + self.width / 2.0

    def grid_points(self) -> np.ndarray:
        """Equally spaced points strictly inside the interval (cell midpoints)."""
        step = self.width / self.n_star
        return self.lo + (np.arange(self.n_star) + 0.5) * step

    def contains(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return (values >= self.lo) & (values <= self.hi)


@dataclass(frozen=True)
class FunctionalEstimates:
    """Interval functionals feeding the plug-in bandwidth."""

    b_hat: float
    v_hat: float
    m4eps: float
    occupancy: float


@dataclass(frozen=True)
class BandwidthPlan:
    """Window, functionals and the resulting plug-in bandwidth."""

    window: IntervalWindow
    functionals: FunctionalEstimates
    h_hat: float
    regime: str
    capped: bool = False


def functional_grid_size(n: int) -> int:
    """Number of equally spaced functional-evaluation points for n observations."""
    return max(50, math.ceil(n / 4))


def default_local_width(pairs: DesignPairs) -> float:
    """Default narrow-interval width: 1.5 * std(regressor) * n^(-1/5)."""
    n = pairs.series_length
    return LOCAL_WIDTH_MULTIPLIER * float(np.std(pairs.regressor)) * n ** (-0.2)


def support_bounds(pairs: DesignPairs) -> tuple[float, float]:
    """Bounds of the central 98% of the regressor sample."""
    lo, hi = np.percentile(pairs.regressor, GLOBAL_QUANTILES)
    return float(lo), float(hi)


def support_window(pairs: DesignPairs) -> IntervalWindow:
    """The global interval: the central 98% of the regressor range."""
    lo, hi = support_bounds(pairs)
    if not hi > lo:
        raise EstimationError("regressor sample is too concentrated for a global interval")
    return IntervalWindow(center=(lo + hi) / 2.0, width=hi - lo,
                          n_star=functional_grid_size(pairs.series_length))


def occupied_window(pairs: DesignPairs, window: IntervalWindow) -> IntervalWindow:
    """Widen a thin interval until it holds enough design points.

    The width grows by 1.5x at most 10 times; a still-empty interval is an
    estimation error rather than a silent fallback.
    """
    current = window
    for _ in range(MAX_INTERVAL_GROWTHS + 1):
        if int(np.count_nonzero(current.contains(pairs.regressor))) >= MIN_INTERVAL_POINTS:
            return current
        current = replace(current, width=current.width * INTERVAL_GROWTH)
    raise EstimationError(
        f"fewer than {MIN_INTERVAL_POINTS} design points in the interval centered at "
        f"{window.center!r} after {MAX_INTERVAL_GROWTHS} widenings"
    )


def bias_functional(pairs: DesignPairs, net, window: IntervalWindow,
                    kernel: KernelSpec = EPANECHNIKOV) -> float:
    """Curvature functional: c1^2 times the in-interval mean of q''(X)^2."""
    window = occupied_window(pairs, window)
    mask = window.contains(pairs.regressor)
    curv = np.asarray(net.second_derivative(pairs.regressor[mask]), dtype=float)
    return float(kernel.c1 ** 2 * np.mean(curv ** 2))


def variance_functional(pairs: DesignPairs, net, m4eps: float, window: IntervalWindow,
                        kernel: KernelSpec = EPANECHNIKOV) -> float:
    """Variance functional: c2 * mean_i q(z_i)^2 (m4eps - 1) / occupancy.

    The numerator averages the pilot-implied conditional variance of the
    squared response over equally spaced points of the interval; the
    denominator is the fraction of the series whose lagged value falls in
    the interval.
    """
    if not m4eps > 1.0:
        raise EstimationError(
            f"innovation fourth moment must exceed 1 (degenerate error "
            f"distribution), got {m4eps!r}")
    window = occupied_window(pairs, window)
    occupancy = in_window_count(pairs, window) / pairs.series_length
    z = window.grid_points()
    v_at_z = np.asarray(net(z), dtype=float) ** 2 * (m4eps - 1.0)
    return float(kernel.c2 * np.mean(v_at_z) / occupancy)


def in_window_count(pairs: DesignPairs, window: IntervalWindow) -> int:
    return int(np.count_nonzero(window.contains(pairs.regressor)))


def plugin_bandwidth(b_hat: float, v_hat: float, n: int) -> float:
    """The plug-in rule h = (v / (4 n b))**(1/5)."""
    if n < 30:
        raise ConfigError(f"series length must be at least 30, got {n}")
    if v_hat < 0:
        raise ConfigError(f"variance functional must be non-negative, got {v_hat!r}")
    if b_hat <= 0:
        raise EstimationError(
            "flat curvature: the bias functional is zero, widen the interval "
            "or cap the bandwidth explicitly")
    if v_hat == 0.0:
        warnings.warn("variance functional is zero; returning a degenerate bandwidth of 0")
        return 0.0
    return float((v_hat / (4.0 * n * b_hat)) ** 0.2)


def resolve_width(pairs: DesignPairs, a) -> float:
    """Translate a width directive (number, GLOBAL or LOCAL) into a width."""
    if a == GLOBAL:
        return support_window(pairs).width
    if a == LOCAL:
        return default_local_width(pairs)
    width = float(a)
    if not (width > 0 and math.isfinite(width)):
        raise ConfigError(f"interval width must be positive, got {a!r}")
    return width


def bandwidth_plan(pairs: DesignPairs, net, m4eps: float, x: float, a=GLOBAL,
                   kernel: KernelSpec = EPANECHNIKOV) -> BandwidthPlan:
    """Assemble the interval, its functionals and the plug-in bandwidth at x.

    ``a`` is the interval width: a positive number, ``GLOBAL`` for the
    central-98% interval (one bandwidth reused everywhere), or ``LOCAL`` for
    the default shrinking width.  The plan regime records whether the final
    interval covers the sample support.
    """
    n = pairs.series_length
    n_star = functional_grid_size(n)
    if a == GLOBAL:
        window = support_window(pairs)
    else:
        window = IntervalWindow(center=float(x), width=resolve_width(pairs, a), n_star=n_star)
    window = occupied_window(pairs, window)

    b_hat = bias_functional(pairs, net, window, kernel)
    v_hat = variance_functional(pairs, net, m4eps, window, kernel)
    occupancy = in_window_count(pairs, window) / n
    functionals = FunctionalEstimates(b_hat=b_hat, v_hat=v_hat, m4eps=float(m4eps),
                                      occupancy=occupancy)

    lo98, hi98 = support_bounds(pairs)
    regime = GLOBAL if (window.lo <= lo98 and window.hi >= hi98) else LOCAL

    if b_hat < FLAT_CURVATURE_THRESHOLD:
        reg = pairs.regressor
        h_cap = float(reg.max() - reg.min()) / 4.0
        warnings.warn(
            f"near-zero curvature in the interval at x={x!r}; capping the "
            f"bandwidth at {h_cap!r}")
        return BandwidthPlan(window=window, functionals=functionals, h_hat=h_cap,
                             regime=regime, capped=True)
    h_hat = plugin_bandwidth(b_hat, v_hat, n)
    return BandwidthPlan(window=window, functionals=functionals, h_hat=h_hat,
                         regime=regime)
