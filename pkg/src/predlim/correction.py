"""Coverage-defect coefficient ``c n^-1`` and the shifts derived from it.

For a limit or interval built by plugging ``rho_hat`` into the exact
predictive law, the conditional coverage is ``1 - alpha + c/n + ...``.
``c/n`` is available two ways:

* closed form (k = 1, sigma2 known): a first-derivative term carrying the
  estimator's conditional bias plus a curvature term carrying its variance;
* simulation: average the exact coverage mass over series drawn conditionally
  on ``Y_n = y_n``. This needs no bias formula, so it works for any estimator.

Dividing ``-c/n`` by the predictive density at the limit gives the additive
shift of the improved limit; for intervals the shift is split equally between
both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import normal
from .ar1_model import Ar1Params, SeedSpec, horizon_moments
from .errors import ParameterError
from .estimators import EstimatorKind, bias_coefficient, estimate_from_stats
from .replicates import backward_replicates

MIN_REPLICATES = 1000


class Target(str, Enum):
    LIMIT = "limit"
    INTERVAL = "interval"


class Source(str, Enum):
    CLOSED = "closed"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class Correction:
    """A value of ``c(theta, y_n) / n`` with provenance."""

    c_over_n: float
    std_error: float
    target: Target
    source: Source
    n: int
    alpha: float
    k: int = 1

    def __post_init__(self):
        if not abs(self.c_over_n) < 1.0:
            raise ParameterError(f"|c_over_n| must be < 1, got {self.c_over_n!r}")
        if self.std_error < 0.0:
            raise ParameterError("std_error must be nonnegative")
        if self.source is Source.CLOSED and self.std_error != 0.0:
            raise ParameterError("closed-form corrections carry no standard error")


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_n(n):
    if n < 3:
        raise ParameterError(f"series length must be >= 3, got {n!r}")


def limit_defect(rho, sigma2, y_n, alpha, n, b):
    """Closed-form ``c/n`` for the upper limit; broadcasts over ``rho``/``b``.

    With ``z`` the standard normal ``1 - alpha`` quantile the coverage mass is
    ``G(r) = Phi(((r - rho) y_n + sigma z) / sigma)``; its derivatives at
    ``r = rho`` are ``phi(z) y_n / sigma`` and ``-z phi(z) y_n^2 / sigma2``.
    """
    z = normal.ndtri(1.0 - alpha)
    phi = normal.npdf(z)
    slope = phi * y_n / math.sqrt(sigma2)
    curvature = -z * phi * y_n * y_n / sigma2
    return slope * b / n + 0.5 * curvature * (1.0 - rho * rho) / n


def interval_defect(rho, sigma2, y_n, alpha, n):
    """Closed-form ``c/n`` for the equal-density interval.

    The slope terms of the two ends cancel by symmetry, so the bias drops out
    and only the curvature ``-2 z phi(z) y_n^2 / sigma2`` times the variance
    remains.
    """
    z = normal.ndtri(1.0 - 0.5 * alpha)
    phi = normal.npdf(z)
    return -z * phi * y_n * y_n / sigma2 * (1.0 - rho * rho) / n


def closed_form_c_limit(params: Ar1Params, y_n: float, alpha: float, n: int,
                        kind: EstimatorKind) -> Correction:
    _check_alpha(alpha)
    _check_n(n)
    b = bias_coefficient(kind, params.rho, params.sigma2, float(y_n))
    c = limit_defect(params.rho, params.sigma2, float(y_n), alpha, n, b)
    return Correction(float(c), 0.0, Target.LIMIT, Source.CLOSED, n, alpha)


def closed_form_c_interval(params: Ar1Params, y_n: float, alpha: float, n: int,
                           kind: EstimatorKind | None = None) -> Correction:
    """``kind`` is accepted for symmetry with the limit version and ignored."""
    _check_alpha(alpha)
    _check_n(n)
    c = interval_defect(params.rho, params.sigma2, float(y_n), alpha, n)
    return Correction(float(c), 0.0, Target.INTERVAL, Source.CLOSED, n, alpha)


def d_from_c(corr: Correction, f_at_limit: float) -> float:
    if corr.target is not Target.LIMIT:
        raise ParameterError("d_from_c needs a limit-targeted correction")
    if not f_at_limit > 0.0:
        raise ParameterError(f"density at the limit must be positive, got {f_at_limit!r}")
    return -corr.c_over_n / f_at_limit


def delta_from_c(corr: Correction, f_at_u: float) -> float:
    """Per-end widening; ``f`` is equal at both ends so either may be passed."""
    if corr.target is not Target.INTERVAL:
        raise ParameterError("delta_from_c needs an interval-targeted correction")
    if not f_at_u > 0.0:
        raise ParameterError(f"density at the endpoint must be positive, got {f_at_u!r}")
    return -corr.c_over_n / (2.0 * f_at_u)


def limit_shift(kind, rho_hat, sigma2, y_n, alpha, n):
    """Improved-limit shift evaluated at the plug-in ``rho_hat`` (vectorised)."""
    rho_hat = np.asarray(rho_hat, dtype=float)
    b = bias_coefficient(kind, rho_hat, sigma2, y_n)
    c = limit_defect(rho_hat, sigma2, y_n, alpha, n, b)
    density = normal.npdf(normal.ndtri(1.0 - alpha)) / math.sqrt(sigma2)
    return -c / density


def interval_shift(rho_hat, sigma2, y_n, alpha, n):
    """Per-end improved-interval shift at the plug-in ``rho_hat`` (vectorised)."""
    rho_hat = np.asarray(rho_hat, dtype=float)
    c = interval_defect(rho_hat, sigma2, y_n, alpha, n)
    density = normal.npdf(normal.ndtri(1.0 - 0.5 * alpha)) / math.sqrt(sigma2)
    return -c / (2.0 * density)


def coverage_mass(rho_hat, params: Ar1Params, y_n: float, alpha: float,
                  target: Target, k: int = 1, shift=0.0) -> np.ndarray:
    """True-law probability of the region built at ``rho_hat``.

    ``shift`` widens the region: it is added to an upper limit, and moved
    outwards at both ends of an interval.
    """
    target = Target(target)
    mean_t, var_t = horizon_moments(params.rho, params.sigma2, y_n, k)
    sd_t = math.sqrt(float(var_t))
    mean_h, var_h = horizon_moments(rho_hat, params.sigma2, y_n, k)
    sd_h = np.sqrt(var_h)
    if target is Target.LIMIT:
        z = normal.ndtri(1.0 - alpha)
        return normal.ndtr_array((mean_h + sd_h * z + shift - mean_t) / sd_t)
    z = normal.ndtri(1.0 - 0.5 * alpha)
    upper = normal.ndtr_array((mean_h + sd_h * z + shift - mean_t) / sd_t)
    lower = normal.ndtr_array((mean_h - sd_h * z - shift - mean_t) / sd_t)
    return upper - lower


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error, both via correctly rounded sums.

    ``math.fsum`` makes the result independent of summation order, hence of
    how replicates were split across workers.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    mean = math.fsum(values) / m
    if m < 2:
        return mean, 0.0
    dev = values - mean
    var = math.fsum(dev * dev) / (m - 1)
    return mean, math.sqrt(var / m)


def _master(seed) -> int:
    return int(seed.master_seed) if isinstance(seed, SeedSpec) else int(seed)


def simulated_corrections(params_plug: Ar1Params, y_n: float, alpha: float, n: int, M: int,
                          kinds, targets, seed, workers: int | None = None,
                          k: int = 1) -> dict:
    """Simulated ``c/n`` for several estimators and targets on shared series.

    Returns ``{(kind, target): Correction}``. Each entry equals what
    :func:`simulated_c` returns for that pair and seed; the series are simply
    drawn once.
    """
    _check_alpha(alpha)
    _check_n(n)
    if M < MIN_REPLICATES:
        raise ParameterError(f"M must be >= {MIN_REPLICATES}, got {M}")
    kinds = [EstimatorKind.parse(kd) for kd in kinds]
    targets = [Target(t) for t in targets]
    y_n = float(y_n)
    stats = backward_replicates(params_plug, n, y_n, M, _master(seed), workers)
    out = {}
    for kind in kinds:
        rho_hat = estimate_from_stats(kind, stats)
        for target in targets:
            mass = coverage_mass(rho_hat, params_plug, y_n, alpha, target, k)
            nominal = coverage_mass(np.array([params_plug.rho]), params_plug, y_n,
                                    alpha, target, k)[0]
            c, se = mean_and_se(mass - nominal)
            out[(kind, target)] = Correction(c, se, target, Source.SIMULATED, n, alpha, k)
    return out


def simulated_c(params_plug: Ar1Params, y_n: float, alpha: float, n: int, M: int,
                kind: EstimatorKind, target: Target, seed, workers: int | None = None,
                k: int = 1) -> Correction:
    """Monte-Carlo ``c/n`` at ``params_plug`` for any estimator of rho.

    Each replicate contributes the exact coverage mass of the estimative
    region, so no future value is sampled. The nominal mass is evaluated on
    the same floating-point path and subtracted per replicate, which makes
    cells with no sensitivity to ``rho_hat`` (e.g. ``y_n = 0``) return exactly 0.
    """
    kind = EstimatorKind.parse(kind)
    target = Target(target)
    table = simulated_corrections(params_plug, y_n, alpha, n, M, [kind], [target], seed,
                                  workers, k)
    return table[(kind, target)]
