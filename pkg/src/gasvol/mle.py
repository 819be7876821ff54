"""Gaussian quasi-maximum-likelihood estimation of GARCH(1,1).

This is the parametric comparison baseline.  The conditional variance
recursion is evaluated as a linear filter, the stationarity and positivity
constraints are enforced by an unconstrained reparameterization, and the
optimizer is a derivative-free simplex search restarted from perturbed
moment-based starting points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import expit, logit

from .errors import ConfigError, EstimationError
from .garch import GarchParams
from .kernels import ReturnSeries

MIN_MLE_LENGTH = 100

# Persistence is kept strictly inside the stationarity region.
_MAX_PERSISTENCE = 1.0 - 1e-6
_LOG_CLIP = 30.0


def conditional_variance_path(series: ReturnSeries, params: GarchParams) -> np.ndarray:
    """Per-observation conditional variance with the first value set to the
    sample variance."""
    x2 = series.values ** 2
    s2_first = float(np.var(series.values))
    if s2_first <= 0:
        raise EstimationError("degenerate series: zero sample variance")
    u = params.alpha0 + params.alpha1 * x2[:-1]
    rest, _ = lfilter([1.0], [1.0, -params.beta], u, zi=[params.beta * s2_first])
    return np.concatenate(([s2_first], rest))


def garch_loglik(series: ReturnSeries, params: GarchParams) -> float:
    """Gaussian log likelihood sum_t [-0.5 log(2 pi s2_t) - x_t^2/(2 s2_t)]."""
    sig2 = conditional_variance_path(series, params)
    x2 = series.values ** 2
    return float(-0.5 * np.sum(np.log(2.0 * math.pi * sig2) + x2 / sig2))


def _theta_to_params(theta) -> GarchParams:
    t0, t1, t2 = (float(np.clip(t, -_LOG_CLIP, _LOG_CLIP)) for t in theta)
    alpha0 = math.exp(t0)
    persistence = _MAX_PERSISTENCE * float(expit(t1))
    split = float(expit(t2))
    alpha1 = max(persistence * split, 1e-12)
    beta = persistence - alpha1
    return GarchParams(alpha0=alpha0, alpha1=alpha1, beta=max(beta, 0.0))


def _params_to_theta(params: GarchParams) -> np.ndarray:
    persistence = min(params.persistence, _MAX_PERSISTENCE * (1 - 1e-9))
    split = params.alpha1 / max(persistence, 1e-12)
    return np.array([
        math.log(params.alpha0),
        float(logit(np.clip(persistence / _MAX_PERSISTENCE, 1e-12, 1 - 1e-12))),
        float(logit(np.clip(split, 1e-12, 1 - 1e-12))),
    ])


@dataclass
class MleFit:
    """A fitted GARCH(1,1) with its likelihood diagnostics."""

    params: GarchParams
    loglik: float
    converged: bool
    iterations: int
    fitted_sigma2: np.ndarray
    start: GarchParams
    loglik_trace: list


def _moment_starts(series: ReturnSeries, rng) -> list[GarchParams]:
    v = float(np.var(series.values))
    bases = [(0.10, 0.80), (0.30, 0.30), (0.05, 0.90)]
    starts = []
    for a1, b in bases:
        starts.append(GarchParams(alpha0=max(v * (1 - a1 - b), 1e-8), alpha1=a1, beta=b))
    while len(starts) < 5:
        theta = _params_to_theta(starts[0]) + rng.normal(0.0, 0.6, size=3)
        starts.append(_theta_to_params(theta))
    return starts


def fit_garch_mle(series: ReturnSeries, start: GarchParams | None = None,
                  seed: int = 0, restarts: int = 5, maxiter: int = 4000) -> MleFit:
    """Fit GARCH(1,1) by Gaussian quasi-maximum likelihood.

    Deterministic given the seed and starting point.  Each restart runs a
    Nelder-Mead search in the unconstrained parameterization; the best point
    gets one polishing rerun.  The returned trace holds the best objective
    value per accepted iteration of the winning run, which is non-decreasing
    in the likelihood by construction of the simplex method.
    """
    if not isinstance(series, ReturnSeries):
        series = ReturnSeries(np.asarray(series, dtype=float))
    if series.n < MIN_MLE_LENGTH:
        raise ConfigError(f"MLE needs at least {MIN_MLE_LENGTH} observations, got {series.n}")
    if float(np.var(series.values)) <= 0:
        raise EstimationError("degenerate series: zero sample variance")

    rng = np.random.default_rng(seed)
    starts = _moment_starts(series, rng)
    if start is not None:
        starts = [start] + starts
    starts = starts[:max(int(restarts), 1)]

    def objective(theta):
        try:
            return -garch_loglik(series, _theta_to_params(theta))
        except (OverflowError, FloatingPointError):
            return float("inf")

    best = None
    for p0 in starts:
        res = minimize(objective, _params_to_theta(p0), method="Nelder-Mead",
                       options={"maxiter": int(maxiter), "xatol": 1e-7,
                                "fatol": 1e-10, "adaptive": True})
        if best is None or res.fun < best[0].fun:
            best = (res, p0)

    res0, start_used = best
    trace = []

    def record(xk):
        val = -objective(xk)
        if not trace or val >= trace[-1]:
            trace.append(val)

    polished = minimize(objective, res0.x, method="Nelder-Mead", callback=record,
                        options={"maxiter": int(maxiter), "xatol": 1e-8,
                                 "fatol": 1e-11, "adaptive": True})
    final = polished if polished.fun <= res0.fun else res0
    params = _theta_to_params(final.x)
    loglik = -float(final.fun)
    if not math.isfinite(loglik):
        raise EstimationError("likelihood is not finite at the chosen optimum")
    return MleFit(
        params=params,
        loglik=loglik,
        converged=bool(res0.success or polished.success),
        iterations=int(res0.nit + polished.nit),
        fitted_sigma2=conditional_variance_path(series, params),
        start=start_used,
        loglik_trace=trace,
    )


def mle_sigma2_curve(fit: MleFit, x_grid) -> np.ndarray:
    """The fitted model's variance as a one-argument curve of the lagged return.

    The latent lagged variance is pinned at its unconditional mean, which is
    the standard news-impact-curve convention, so the curve is
    ``alpha0 + alpha1 x^2 + beta * alpha0 / (1 - alpha1 - beta)``.
    """
    if not fit.converged:
        raise EstimationError("cannot evaluate the variance curve of a non-converged fit")
    p = fit.params
    x = np.asarray(x_grid, dtype=float)
    return p.alpha0 + p.alpha1 * x ** 2 + p.zero_excess
