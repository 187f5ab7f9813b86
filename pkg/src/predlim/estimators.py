"""Estimators of the AR(1) coefficient and their first-order conditional biases.

All three estimators share the numerator ``sum_{t=2}^n y_t y_{t-1}`` and
differ only in which squares enter the denominator:

* least squares:        t = 1..n-1
* Yule-Walker:          t = 1..n
* backward conditional: t = 2..n  (maximises the likelihood given ``Y_n``)

They are within O(1/n) of each other, yet their biases conditional on the
last observation differ at order 1/n.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ar1_model import Ar1Params, TimeSeries
from .errors import DegenerateSeriesError, ParameterError, UnsupportedBiasError


class EstimatorKind(str, Enum):
    LEAST_SQUARES = "least_squares"
    YULE_WALKER = "yule_walker"
    BACKWARD_CONDITIONAL = "backward_conditional"

    @classmethod
    def parse(cls, value) -> "EstimatorKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ParameterError(f"unknown estimator {value!r}; expected one of {choices}") from None

    @property
    def has_conditional_bias(self) -> bool:
        return self is not EstimatorKind.YULE_WALKER


@dataclass(frozen=True)
class ConditionalBias:
    """Coefficient ``b`` of ``1/n`` in ``E(rho_hat - rho | Y_n = y_n)``."""

    b: float
    kind: EstimatorKind


def estimate(kind: EstimatorKind, series: TimeSeries) -> float:
    kind = EstimatorKind.parse(kind)
    y = series.values
    num = float(np.dot(y[1:], y[:-1]))
    if kind is EstimatorKind.LEAST_SQUARES:
        den = float(np.dot(y[:-1], y[:-1]))
    elif kind is EstimatorKind.YULE_WALKER:
        den = float(np.dot(y, y))
    else:
        den = float(np.dot(y[1:], y[1:]))
    if den == 0.0:
        raise DegenerateSeriesError(f"{kind.value} denominator is zero (all-zero window)")
    return num / den


def estimate_from_stats(kind: EstimatorKind, stats) -> np.ndarray:
    """Vectorised estimate over a :class:`~predlim.replicates.ReplicateStats`."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.LEAST_SQUARES:
        den = stats.head
    elif kind is EstimatorKind.YULE_WALKER:
        den = stats.full
    else:
        den = stats.tail
    return stats.sxy / den


def bias_coefficient(kind: EstimatorKind, rho, sigma2, y_n):
    """``b(rho, y_n)``; broadcasts over arrays of ``rho``."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.LEAST_SQUARES:
        return y_n * y_n * (1.0 - rho * rho) * rho / sigma2 - 3.0 * rho
    if kind is EstimatorKind.BACKWARD_CONDITIONAL:
        return -2.0 * rho
    raise UnsupportedBiasError(
        "no closed-form conditional bias for yule_walker; use the simulated correction"
    )


def conditional_bias(kind: EstimatorKind, params: Ar1Params, y_n: float) -> ConditionalBias:
    kind = EstimatorKind.parse(kind)
    b = bias_coefficient(kind, params.rho, params.sigma2, float(y_n))
    return ConditionalBias(float(b), kind)


def unconditional_bias_coefficient(kind: EstimatorKind, rho: float) -> float:
    """Coefficient of ``1/n`` in the unconditional bias ``E(rho_hat - rho)``."""
    kind = EstimatorKind.parse(kind)
    return -3.0 * rho if kind is EstimatorKind.YULE_WALKER else -2.0 * rho


def inverse_information(params: Ar1Params, n: int) -> float:
    """Leading variance of ``rho_hat`` with sigma2 known: ``(1 - rho^2) / n``."""
    if n < 3:
        raise ParameterError(f"series length must be >= 3, got {n!r}")
    return (1.0 - params.rho * params.rho) / n
