"""Single-hidden-layer sigmoid pilot regression for the conditional variance.

The pilot is a least-squares fit of ``q(x) = bias + sum_k c_k * sigmoid(a_k x
+ b_k)`` to the (lagged return, squared return) design.  It is never the
final estimate: it only supplies smooth plug-in quantities, namely the
curvature ``q''`` and the innovation fourth moment, from which adaptive
bandwidths and inference constants are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import ConfigError, EstimationError, PilotFitError
from .kernels import DesignPairs

DEFAULT_D_CANDIDATES = (1, 2, 3, 4, 5)
DEFAULT_WEIGHT_BUDGET = 1e3

# Random restarts draw weights uniformly from this box; hidden-unit centers
# are spread over the standardized regressor range.
_INIT_WEIGHT_HALF_RANGE = 0.7

# Hidden-unit slopes are boxed on the standardized scale: the pilot exists to
# deliver a smooth curvature estimate, and unbounded slopes let step-like
# units drive q'' (and with it the plug-in bandwidth) to absurd magnitudes.
SLOPE_BOUND = 10.0


@dataclass(frozen=True)
class PilotNetwork:
    """Fitted sigmoid network in original regressor units.

    ``out_weights`` are the linear output coefficients, ``slopes`` and
    ``offsets`` the per-unit input affine maps.  The standardization used
    during fitting is folded into the weights; ``x_center``/``x_scale`` are
    kept for reproducibility of saved fits only.
    """

    bias: float
    out_weights: np.ndarray
    slopes: np.ndarray
    offsets: np.ndarray
    weight_budget: float = DEFAULT_WEIGHT_BUDGET
    x_center: float = 0.0
    x_scale: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.out_weights, dtype=float))
        a = np.atleast_1d(np.asarray(self.slopes, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if not (c.shape == a.shape == b.shape) or c.ndim != 1 or c.size < 1:
            raise ConfigError("out_weights, slopes and offsets must be equal-length 1-d arrays")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
            raise ConfigError("network weights must be finite")
        object.__setattr__(self, "out_weights", c)
        object.__setattr__(self, "slopes", a)
        object.__setattr__(self, "offsets", b)

    @property
    def hidden_count(self) -> int:
        return int(self.out_weights.size)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        z = np.multiply.outer(x, self.slopes) + self.offsets
        out = self.bias + expit(z) @ self.out_weights
        if out.ndim == 0:
            return float(out)
        return out

    def second_derivative(self, x):
        """Analytic q''(x) = sum_k c_k a_k^2 s(1-s)(1-2s) with s = sigmoid."""
        x = np.asarray(x, dtype=float)
        z = np.multiply.outer(x, self.slopes) + self.offsets
        s = expit(z)
        curv = s * (1.0 - s) * (1.0 - 2.0 * s)
        out = curv @ (self.out_weights * self.slopes ** 2)
        if out.ndim == 0:
            return float(out)
        return out


def pilot_eval(net: PilotNetwork, x):
    """Evaluate the pilot regression function at x (scalar or array)."""
    return net(x)


def pilot_second_derivative(net: PilotNetwork, x):
    """Evaluate the analytic second derivative of the pilot at x."""
    return net.second_derivative(x)


@dataclass
class PilotFitReport:
    """Diagnostics for a pilot fit."""

    chosen_d: int
    bic_by_d: dict
    rss: float
    restarts: int
    converged: bool
    m4eps: float


def _pack(bias, c, a, b):
    return np.concatenate(([bias], c, a, b))


def _unpack(theta, d):
    return theta[0], theta[1:1 + d], theta[1 + d:1 + 2 * d], theta[1 + 2 * d:1 + 3 * d]


def _mse_and_grad(theta, u, y, d):
    bias, c, a, b = _unpack(theta, d)
    m = u.size
    z = np.multiply.outer(u, a) + b
    s = expit(z)
    r = bias + s @ c - y
    f = float(r @ r) / m
    ds = s * (1.0 - s)
    g_bias = 2.0 * float(np.sum(r)) / m
    g_c = 2.0 * (r @ s) / m
    g_a = 2.0 * c * ((r * u) @ ds) / m
    g_b = 2.0 * c * (r @ ds) / m
    return f, _pack(g_bias, g_c, g_a, g_b)


def _initial_theta(rng, u, y, d):
    c = rng.uniform(-_INIT_WEIGHT_HALF_RANGE, _INIT_WEIGHT_HALF_RANGE, size=d)
    a = rng.uniform(-_INIT_WEIGHT_HALF_RANGE, _INIT_WEIGHT_HALF_RANGE, size=d)
    lo, hi = float(u.min()), float(u.max())
    centers = np.linspace(lo, hi, d + 2)[1:-1]
    if d > 0:
        spacing = (hi - lo) / (d + 1)
        centers = centers + rng.uniform(-0.5, 0.5, size=d) * spacing
    b = -a * centers
    return _pack(float(np.mean(y)), c, a, b)


def fit_pilot(pairs: DesignPairs, d_candidates=DEFAULT_D_CANDIDATES, restarts: int = 3,
              seed: int = 0, weight_budget: float = DEFAULT_WEIGHT_BUDGET,
              max_iter: int = 500):
    """Least-squares pilot fit with BIC selection of the hidden-unit count.

    For every candidate count the objective is minimized from ``restarts``
    random initializations (L-BFGS with analytic gradients); the best run per
    candidate enters ``BIC = m log(RSS/m) + p log m`` with ``p = 3 d + 1``
    parameters, and the candidate with minimal BIC wins.  The restart streams
    depend only on (seed, d, restart index), so adding restarts can only
    improve the best fit for a given candidate and reruns are bit-identical.

    Returns (network, report).  Raises PilotFitError, carrying the
    best-effort network, when no run converged for any candidate.
    """
    d_candidates = tuple(int(d) for d in d_candidates)
    if not d_candidates or min(d_candidates) < 1:
        raise ConfigError("d_candidates must be a non-empty list of positive integers")
    if restarts < 1:
        raise ConfigError("restarts must be at least 1")

    x = pairs.regressor
    y = pairs.response
    m = pairs.count
    mx = float(np.mean(x))
    sx = max(float(np.std(x)), 1e-12)
    u = (x - mx) / sx

    best_by_d = {}
    any_success = False
    for d in d_candidates:
        # Boxing each output weight at budget/d keeps the total within the
        # budget and stops the optimizer from drifting into the unstable
        # huge-weight near-linear sigmoid regime.
        box = weight_budget / d
        bounds = ([(None, None)] + [(-box, box)] * d
                  + [(-SLOPE_BOUND, SLOPE_BOUND)] * d + [(None, None)] * d)
        best = None
        for r in range(restarts):
            rng = np.random.default_rng([int(seed), int(d), int(r)])
            theta0 = _initial_theta(rng, u, y, d)
            res = minimize(
                _mse_and_grad, theta0, args=(u, y, d), jac=True, method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": int(max_iter), "ftol": 1e-12, "gtol": 1e-9},
            )
            rss = float(res.fun) * m
            if best is None or rss < best[0]:
                best = (rss, res.x.copy(), bool(res.success))
            any_success = any_success or bool(res.success)
        best_by_d[d] = best

    bic_by_d = {}
    for d, (rss, _, _) in best_by_d.items():
        bic_by_d[d] = m * math.log(max(rss, 1e-300) / m) + (3 * d + 1) * math.log(m)
    chosen_d = min(bic_by_d, key=lambda d: (bic_by_d[d], d))
    rss, theta, success = best_by_d[chosen_d]
    bias, c, a, b = _unpack(theta, chosen_d)

    # Bounded-weight constraint: rescale the output layer if the budget binds.
    total = float(np.sum(np.abs(c)))
    if total > weight_budget:
        c = c * (weight_budget / total)
        r = bias + expit(np.multiply.outer(u, a) + b) @ c - y
        rss = float(r @ r)

    net = PilotNetwork(
        bias=float(bias),
        out_weights=c,
        slopes=a / sx,
        offsets=b - a * mx / sx,
        weight_budget=float(weight_budget),
        x_center=mx,
        x_scale=sx,
    )
    report = PilotFitReport(
        chosen_d=chosen_d,
        bic_by_d=bic_by_d,
        rss=float(rss),
        restarts=int(restarts),
        converged=bool(success),
        m4eps=estimate_m4eps(pairs, net),
    )
    if not any_success:
        report.converged = False
        raise PilotFitError(
            "pilot optimizer failed to converge on every restart for every "
            "candidate size", network=net, report=report)
    return net, report


def estimate_m4eps(pairs: DesignPairs, net) -> float:
    """Fourth moment of the innovation: sum of squared responses over the sum
    of squared pilot values across the design.

    At a least-squares stationary point the ratio is at least 1 because the
    fitted function is orthogonal to its own residuals.
    """
    num = float(np.sum(pairs.response ** 2))
    den = float(np.sum(np.asarray(net(pairs.regressor), dtype=float) ** 2))
    if not den > 0.0:
        raise EstimationError("degenerate pilot: sum of squared pilot values is zero")
    return num / den


def save_pilot(net: PilotNetwork, path) -> None:
    """Persist a fitted network as one key=value per line (full precision)."""
    lines = [
        f"hidden_count={net.hidden_count}",
        f"x_center={float(net.x_center)!r}",
        f"x_scale={float(net.x_scale)!r}",
        f"weight_budget={float(net.weight_budget)!r}",
        f"bias={float(net.bias)!r}",
    ]
    for k in range(net.hidden_count):
        lines.append(f"out_weight_{k}={float(net.out_weights[k])!r}")
        lines.append(f"slope_{k}={float(net.slopes[k])!r}")
        lines.append(f"offset_{k}={float(net.offsets[k])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_pilot(path) -> PilotNetwork:
    """Load a network written by save_pilot."""
    fields = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        d = int(fields["hidden_count"])
        return PilotNetwork(
            bias=float(fields["bias"]),
            out_weights=np.array([float(fields[f"out_weight_{k}"]) for k in range(d)]),
            slopes=np.array([float(fields[f"slope_{k}"]) for k in range(d)]),
            offsets=np.array([float(fields[f"offset_{k}"]) for k in range(d)]),
            weight_budget=float(fields.get("weight_budget", DEFAULT_WEIGHT_BUDGET)),
            x_center=float(fields.get("x_center", 0.0)),
            x_scale=float(fields.get("x_scale", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing field {exc}") from None
