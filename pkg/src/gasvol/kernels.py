"""Local linear smoothing of squared returns with the Epanechnikov kernel.

The regression estimated here is E[X_t^2 | X_{t-1} = x], i.e. the conditional
variance of a zero-mean return series as a function of the previous return.
The estimator is the classic local linear fit expressed through effective
kernel weights, so downstream code can reuse the weights for inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, EstimationError

MIN_SERIES_LENGTH = 30

# Sparse-window handling: a local linear system needs a handful of points to
# be well posed, so the bandwidth is inflated geometrically before giving up.
MIN_WINDOW_POINTS = 5
WINDOW_GROWTH = 1.2
MAX_WINDOW_GROWTHS = 25

# Local systems with |S0*S2 - S1^2| below this relative threshold are
# reported as degenerate rather than silently regularized.
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric density kernel on [-1, 1] and its plug-in constants.

    ``mu2`` is the second moment of the kernel and ``roughness`` the integral
    of its square.  The derived constants ``c1 = mu2 / 2`` and
    ``c2 = roughness`` are exactly the ones that make the plug-in rule
    ``h = (v / (4 n b))**(1/5)`` equal to the AMISE-optimal local linear
    bandwidth.
    """

    name: str
    mu2: float
    roughness: float
    support: tuple[float, float] = (-1.0, 1.0)

    @property
    def c1(self) -> float:
        """Bias constant: half the kernel's second moment."""
        return self.mu2 / 2.0

    @property
    def c2(self) -> float:
        """Variance constant: the kernel's roughness."""
        return self.roughness

    def __call__(self, u):
        if self.name != "epanechnikov":
            raise ConfigError(f"unsupported kernel: {self.name!r}")
        return epanechnikov(u)


#: The only kernel required by the estimation pipeline.  mu2 and roughness
#: are the closed-form rationals 1/5 and 3/5.
EPANECHNIKOV = KernelSpec(name="epanechnikov", mu2=0.2, roughness=0.6)

_KERNELS = {"epanechnikov": EPANECHNIKOV}


def get_kernel(name: str) -> KernelSpec:
    """Look up a kernel by name; raises ConfigError for unknown names."""
    try:
        return _KERNELS[name.lower()]
    except KeyError:
        raise ConfigError(f"unsupported kernel: {name!r}") from None


def epanechnikov(u):
    """Evaluate 0.75 * (1 - u^2) on [-1, 1], zero outside.

    Accepts scalars or arrays and is total: every finite input maps to a
    non-negative value.
    """
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def kernel_constants(spec: KernelSpec) -> tuple[float, float]:
    """Return the bias/variance constants (c1, c2) for a supported kernel."""
    if spec.name not in _KERNELS:
        raise ConfigError(f"unsupported kernel: {spec.name!r}")
    return spec.c1, spec.c2


@dataclass(frozen=True)
class ReturnSeries:
    """An observed, finite return series; the sole input to estimation."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError("return series must be one-dimensional")
        if values.size < MIN_SERIES_LENGTH:
            raise DataError(
                f"return series needs at least {MIN_SERIES_LENGTH} observations, "
                f"got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("return series contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def pairs(self) -> "DesignPairs":
        return design_pairs(self)


@dataclass(frozen=True)
class DesignPairs:
    """Lagged-return regressors paired with squared-return responses."""

    regressor: np.ndarray
    response: np.ndarray
    series_length: int

    def __post_init__(self):
        regressor = np.asarray(self.regressor, dtype=float)
        response = np.asarray(self.response, dtype=float)
        if regressor.shape != response.shape or regressor.ndim != 1:
            raise DataError("regressor and response must be 1-d arrays of equal length")
        if regressor.size != self.series_length - 1:
            raise DataError(
                f"expected {self.series_length - 1} pairs for a series of length "
                f"{self.series_length}, got {regressor.size}"
            )
        if not (np.all(np.isfinite(regressor)) and np.all(np.isfinite(response))):
            raise DataError("design pairs contain non-finite values")
        if np.any(response < 0):
            raise DataError("responses are squared returns and must be non-negative")
        object.__setattr__(self, "regressor", regressor)
        object.__setattr__(self, "response", response)

    @property
    def count(self) -> int:
        return int(self.regressor.size)


def design_pairs(series) -> DesignPairs:
    """Build (X_{t-1}, X_t^2) pairs from a return series."""
    if not isinstance(series, ReturnSeries):
        series = ReturnSeries(np.asarray(series, dtype=float))
    x = series.values
    return DesignPairs(regressor=x[:-1], response=x[1:] ** 2, series_length=series.n)


def _inflated_bandwidth(regressor: np.ndarray, x: float, h: float) -> float:
    """Grow h geometrically until the window holds enough design points."""
    dist = np.abs(regressor - x)
    h_used = h
    for _ in range(MAX_WINDOW_GROWTHS + 1):
        if int(np.count_nonzero(dist <= h_used)) >= MIN_WINDOW_POINTS:
            return h_used
        h_used *= WINDOW_GROWTH
    raise EstimationError(
        f"fewer than {MIN_WINDOW_POINTS} design points near x={x!r} even after "
        f"inflating the bandwidth {MAX_WINDOW_GROWTHS} times"
    )


def effective_weights(pairs: DesignPairs, x: float, h: float,
                      kernel: KernelSpec = EPANECHNIKOV) -> np.ndarray:
    """Effective kernel weights of the local linear fit at x.

    The weights satisfy sum(W) = 1 and sum(W * (X_{t-1} - x)) = 0, which is
    what makes the fit reproduce constants and straight lines exactly.

    Raises EstimationError when the local system is numerically singular at
    x even after the sparse-window inflation rule.
    """
    if h <= 0 or not math.isfinite(h):
        raise ConfigError(f"bandwidth must be positive and finite, got {h!r}")
    u = pairs.regressor - x
    h_used = _inflated_bandwidth(pairs.regressor, x, h)
    k = kernel(u / h_used)
    s0 = float(np.sum(k))
    s1 = float(np.sum(k * u))
    s2 = float(np.sum(k * u * u))
    den = s0 * s2 - s1 * s1
    in_window = np.abs(u) <= h_used
    width = float(u[in_window].max() - u[in_window].min()) if np.any(in_window) else 0.0
    if abs(den) <= SINGULAR_RTOL * max(s0 * width * width, 1e-300):
        raise EstimationError(f"degenerate local linear system at x={x!r}")
    return k * (s2 - u * s1) / den


def local_linear_fit(pairs: DesignPairs, x: float, h: float,
                     kernel: KernelSpec = EPANECHNIKOV) -> float:
    """Local linear estimate of the conditional variance at x."""
    w = effective_weights(pairs, x, h, kernel)
    return float(w @ pairs.response)
