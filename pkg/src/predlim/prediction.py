"""Estimative and improved prediction limits and equal-density intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from . import normal
from .ar1_model import Ar1Params, PredictiveDist, conditional_predictive
from .correction import Correction, Target, d_from_c, delta_from_c
from .errors import NumericError, ParameterError

DENSITY_FLOOR = 1e-300


class Flavor(str, Enum):
    ESTIMATIVE = "estimative"
    IMPROVED = "improved"


@dataclass(frozen=True)
class UpperLimit:
    value: float
    alpha: float
    flavor: Flavor


@dataclass(frozen=True)
class CentralInterval:
    lower: float
    upper: float
    alpha: float
    flavor: Flavor

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ParameterError(f"interval endpoints out of order: [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


def estimative_upper_limit(theta_hat: Ar1Params, y_n: float, k: int, alpha: float) -> UpperLimit:
    _check_alpha(alpha)
    dist = conditional_predictive(theta_hat, y_n, k)
    return UpperLimit(dist.quantile(1.0 - alpha), alpha, Flavor.ESTIMATIVE)


def _bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float, maxiter: int = 400):
    """Root of a function increasing on [lo, hi] with fn(lo) <= 0 <= fn(hi)."""
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def equal_density_endpoints(pdf: Callable[[float], float], cdf: Callable[[float], float],
                            mode: float, scale: float, alpha: float,
                            tol: float = 1e-10) -> tuple[float, float]:
    """Shortest ``1 - alpha`` region of a continuous unimodal density.

    Bisects on the density level ``h``: for each ``h`` the two points where
    the density equals ``h`` are found by bisection on either side of the
    mode, and ``h`` is adjusted until the enclosed mass is ``1 - alpha``
    (to ``tol`` in probability).
    """
    _check_alpha(alpha)
    peak = pdf(mode)
    if not peak > 0.0 or not math.isfinite(peak):
        raise NumericError(f"density at the mode is {peak!r}")
    # bracket both tails where the density is negligible against any level we probe
    reach = scale
    while pdf(mode - reach) > 1e-3 * peak * alpha or pdf(mode + reach) > 1e-3 * peak * alpha:
        reach *= 2.0
        if reach > 1e6 * scale:
            raise NumericError("could not bracket the density tails")
    xtol = 1e-14 * max(scale, abs(mode))

    def ends(level):
        left = _bisect(lambda x: pdf(x) - level, mode - reach, mode, xtol)
        right = _bisect(lambda x: level - pdf(x), mode, mode + reach, xtol)
        return left, right

    def excess_mass(level_frac):
        # decreasing in level, so flip the sign for the increasing bisection
        left, right = ends(level_frac * peak)
        return (1.0 - alpha) - (cdf(right) - cdf(left))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gap = excess_mass(mid)
        if abs(gap) <= tol:
            break
        if gap > 0.0:
            hi = mid
        else:
            lo = mid
    else:
        raise NumericError(
            f"equal-density solver did not converge: level={mid:.6g}, mass gap={gap:.3g}"
        )
    return ends(mid * peak)


def equal_density_interval(dist: PredictiveDist, alpha: float,
                           method: str = "closed") -> CentralInterval:
    """Equal-density ``1 - alpha`` interval of the predictive law.

    ``method="closed"`` uses the Gaussian form ``mean -/+ sd z``;
    ``method="solve"`` runs the generic unimodal solver.
    """
    _check_alpha(alpha)
    if method == "closed":
        half = dist.sd * normal.ndtri(1.0 - 0.5 * alpha)
        return CentralInterval(dist.mean - half, dist.mean + half, alpha, Flavor.ESTIMATIVE)
    if method == "solve":
        lo, hi = equal_density_endpoints(dist.pdf, dist.cdf, dist.mode, dist.sd, alpha)
        return CentralInterval(lo, hi, alpha, Flavor.ESTIMATIVE)
    raise ParameterError(f"unknown method {method!r}")


def improved_upper_limit(theta_hat: Ar1Params, y_n: float, k: int, alpha: float,
                         corr: Correction) -> UpperLimit:
    """Estimative limit shifted by ``-c/n`` over the density at the limit.

    ``corr`` must be evaluated at the same plug-in parameters.
    """
    if corr.target is not Target.LIMIT:
        raise ParameterError("improved_upper_limit needs a limit-targeted correction")
    if corr.alpha != alpha or corr.k != k:
        raise ParameterError("correction was computed for a different alpha or horizon")
    dist = conditional_predictive(theta_hat, y_n, k)
    base = dist.quantile(1.0 - alpha)
    f = dist.pdf(base)
    if f < DENSITY_FLOOR:
        raise NumericError(f"predictive density at the limit underflows ({f!r})")
    return UpperLimit(base + d_from_c(corr, f), alpha, Flavor.IMPROVED)


def improved_interval(theta_hat: Ar1Params, y_n: float, k: int, alpha: float,
                      corr: Correction) -> CentralInterval:
    if corr.target is not Target.INTERVAL:
        raise ParameterError("improved_interval needs an interval-targeted correction")
    if corr.alpha != alpha or corr.k != k:
        raise ParameterError("correction was computed for a different alpha or horizon")
    dist = conditional_predictive(theta_hat, y_n, k)
    base = equal_density_interval(dist, alpha)
    f = dist.pdf(base.upper)
    if f < DENSITY_FLOOR:
        raise NumericError(f"predictive density at the endpoint underflows ({f!r})")
    delta = delta_from_c(corr, f)
    return CentralInterval(base.lower - delta, base.upper + delta, alpha, Flavor.IMPROVED)
