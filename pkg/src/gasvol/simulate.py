"""Benchmark conditional-heteroskedasticity simulators with seed control.

All randomness flows through numpy's PCG64 generator (normal variates via
the ziggurat method of ``standard_normal``), so a model, length, burn-in and
seed fully determine a path.  Sub-streams for replications are derived with
``substream_seed`` so parallel replications never share a stream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .garch import GarchParams, transformed_innovation
from .kernels import MIN_SERIES_LENGTH, ReturnSeries

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Fixed coefficients of the nonlinear benchmark: conditional standard
# deviation phi(x + 1.2) + 1.5 phi(x - 1.2).
HT_SHIFT = 1.2
HT_SCALE = 1.5

MIN_BURN_IN = 200
DEFAULT_BURN_IN = 500


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Arch1:
    """ARCH(1): conditional variance alpha0 + alpha1 * x^2."""

    alpha0: float
    alpha1: float

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ConfigError(f"alpha0 must be positive, got {self.alpha0!r}")
        if not 0 < self.alpha1 < 1:
            raise ConfigError(f"alpha1 must lie in (0, 1), got {self.alpha1!r}")


@dataclass(frozen=True)
class Garch11:
    """GARCH(1,1) with validated parameters."""

    params: GarchParams


@dataclass(frozen=True)
class HT:
    """Asymmetric nonlinear benchmark; has no free parameters."""


@dataclass(frozen=True)
class ArchEpsTilde:
    """ARCH(1; alpha0, alpha1+beta) driven by transformed innovations.

    This is the baseline path of the one-lag GARCH representation: the
    standard normal innovations are passed through the representation's
    innovation transform before entering the ARCH recursion.
    """

    params: GarchParams


ModelSpec = Arch1 | Garch11 | HT | ArchEpsTilde


@dataclass(frozen=True)
class SimSpec:
    """Everything needed to reproduce a simulated path."""

    model: ModelSpec
    n: int
    burn_in: int = DEFAULT_BURN_IN
    seed: int = 0

    def __post_init__(self):
        if self.n < MIN_SERIES_LENGTH:
            raise ConfigError(f"n must be at least {MIN_SERIES_LENGTH}, got {self.n}")
        if self.burn_in < MIN_BURN_IN:
            raise ConfigError(f"burn_in must be at least {MIN_BURN_IN}, got {self.burn_in}")
        if not isinstance(self.model, (Arch1, Garch11, HT, ArchEpsTilde)):
            raise ConfigError(f"unknown model spec: {self.model!r}")


def substream_seed(master: int, *path: int) -> int:
    """Derive an independent 64-bit sub-seed from a master seed and indices."""
    ss = np.random.SeedSequence([int(master), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def model_name(model: ModelSpec) -> str:
    return {Arch1: "arch1", Garch11: "garch11", HT: "ht", ArchEpsTilde: "arch_eps"}[type(model)]


def simulate(spec: SimSpec, innovations=None) -> ReturnSeries:
    """Simulate a path, discard the burn-in, and return the series.

    ``innovations`` is a test hook: when given, it must hold burn_in + n
    values and replaces the seeded standard normal draws.
    """
    total = spec.burn_in + spec.n
    if innovations is None:
        rng = np.random.default_rng(spec.seed)
        eps = rng.standard_normal(total)
    else:
        eps = np.asarray(innovations, dtype=float)
        if eps.shape != (total,):
            raise ConfigError(
                f"injected innovations must have length burn_in + n = {total}, "
                f"got {eps.shape}")

    model = spec.model
    out = np.empty(total)
    if isinstance(model, Garch11):
        p = model.params
        a0, a1, b = p.alpha0, p.alpha1, p.beta
        s2 = p.unconditional_variance
        x = 0.0
        eps_list = eps.tolist()
        for t, e in enumerate(eps_list):
            if t > 0:
                s2 = a0 + a1 * x * x + b * s2
            x = math.sqrt(s2) * e
            out[t] = x
    else:
        if isinstance(model, Arch1):
            a0, a1 = model.alpha0, model.alpha1
        elif isinstance(model, ArchEpsTilde):
            a0 = model.params.alpha0
            a1 = model.params.persistence
            eps = np.asarray(transformed_innovation(eps, model.params), dtype=float)
        else:
            a0 = a1 = None
        x = 0.0
        eps_list = eps.tolist()
        if isinstance(model, HT):
            shift, scale = HT_SHIFT, HT_SCALE
            for t, e in enumerate(eps_list):
                sd = (math.exp(-0.5 * (x + shift) ** 2)
                      + scale * math.exp(-0.5 * (x - shift) ** 2)) / _SQRT_2PI
                x = sd * e
                out[t] = x
        else:
            for t, e in enumerate(eps_list):
                x = math.sqrt(a0 + a1 * x * x) * e
                out[t] = x
    return ReturnSeries(out[spec.burn_in:])


def true_sigma2(model: ModelSpec, x):
    """Closed-form conditional variance of a benchmark model, if it has one.

    Returns None for GARCH(1,1): its one-lag variance function has no closed
    form and must come from the Monte Carlo tabulation.
    """
    if isinstance(model, Garch11):
        return None
    x = np.asarray(x, dtype=float)
    if isinstance(model, Arch1):
        out = model.alpha0 + model.alpha1 * x ** 2
    elif isinstance(model, ArchEpsTilde):
        p = model.params
        out = p.alpha0 + p.persistence * x ** 2
    elif isinstance(model, HT):
        sd = normal_pdf(x + HT_SHIFT) + HT_SCALE * normal_pdf(x - HT_SHIFT)
        out = sd ** 2
    else:
        raise ConfigError(f"unknown model spec: {model!r}")
    if out.ndim == 0:
        return float(out)
    return out


def write_series_csv(path, series: ReturnSeries, header: bool = True) -> None:
    """Write a return series as a single-column CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["value"])
        for v in series.values:
            writer.writerow([repr(float(v))])


def read_series_csv(path) -> ReturnSeries:
    """Read a single-column CSV of returns, with or without a header row.

    Parse failures report the offending line number.
    """
    values = []
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty CSV")
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
            raise DataError(f"{path}: line {lineno}: expected a single column, got {len(cells)}")
        try:
            values.append(float(cells[0]))
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a number: {cells[0]!r}") from None
    if not values:
        raise DataError(f"{path}: no numeric rows")
    try:
        return ReturnSeries(np.asarray(values))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
