"""Zero-mean Gaussian AR(1) model: parameters, k-step predictive law, simulators.

The process is ``Y_t = rho * Y_{t-1} + eps_t`` with ``eps_t ~ N(0, sigma2)``
and ``|rho| < 1``. Because the law is Gaussian and stationary it is also
time-reversible, so ``Y_t = rho * Y_{t+1} + eta_t`` holds with the same noise
law. Running that recursion down from a fixed ``y_n`` samples the past exactly
conditional on the last observation, which is what conditional-coverage
studies need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import normal
from ._backend import kernels
from .errors import ParameterError

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class Ar1Params:
    """Autoregressive coefficient and innovation variance."""

    rho: float
    sigma2: float

    def __post_init__(self):
        if not math.isfinite(self.rho) or not abs(self.rho) < 1.0:
            raise ParameterError(f"rho must satisfy |rho| < 1, got {self.rho!r}")
        if not math.isfinite(self.sigma2) or not self.sigma2 > 0.0:
            raise ParameterError(f"sigma2 must be positive, got {self.sigma2!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def stationary_variance(self) -> float:
        return self.sigma2 / (1.0 - self.rho * self.rho)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observed values ``y_1 .. y_n`` (n >= 3)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 3:
            raise ParameterError("a series needs at least 3 observations")
        if not np.all(np.isfinite(values)):
            raise ParameterError("series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def last(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class SeedSpec:
    """Address of one random stream: ``(master_seed, stream_index)``.

    The stream for replicate ``m`` depends on nothing else, so any partition
    of replicates across workers reproduces the same draws.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= MAX_SEED:
                raise ParameterError(f"{name} must be an integer in [0, 2**64)")


@dataclass(frozen=True)
class PredictiveDist:
    """Gaussian law of ``Y_{n+k}`` given ``Y_n = y_n``."""

    mean: float
    variance: float
    k: int = 1

    def __post_init__(self):
        if not self.variance > 0.0:
            raise ParameterError(f"variance must be positive, got {self.variance!r}")
        if self.k < 1:
            raise ParameterError(f"horizon k must be >= 1, got {self.k!r}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self, z: float) -> float:
        return normal.ndtr((z - self.mean) / self.sd)

    def pdf(self, z: float) -> float:
        return normal.npdf((z - self.mean) / self.sd) / self.sd

    def pdf_prime(self, z: float) -> float:
        """Derivative of the density in ``z``."""
        return -(z - self.mean) / self.variance * self.pdf(z)

    def quantile(self, p: float) -> float:
        if not 0.0 < p < 1.0:
            raise ParameterError(f"probability must lie in (0, 1), got {p!r}")
        return self.mean + self.sd * normal.ndtri(p)

    @property
    def mode(self) -> float:
        return self.mean


def horizon_moments(rho, sigma2, y_n, k):
    """Mean and variance of the k-step predictive; broadcasts over arrays."""
    rho = np.asarray(rho, dtype=float)
    r2 = rho * rho
    var = np.zeros_like(r2)
    power = np.ones_like(r2)
    for _ in range(k):
        var = var + power
        power = power * r2
    return rho**k * y_n, sigma2 * var


def conditional_predictive(params: Ar1Params, y_n: float, k: int = 1) -> PredictiveDist:
    if k < 1:
        raise ParameterError(f"horizon k must be >= 1, got {k!r}")
    mean, var = horizon_moments(params.rho, params.sigma2, float(y_n), k)
    return PredictiveDist(float(mean), float(var), k)


def predictive_cdf(dist: PredictiveDist, z: float) -> float:
    return dist.cdf(z)


def predictive_pdf(dist: PredictiveDist, z: float) -> float:
    return dist.pdf(z)


def predictive_quantile(dist: PredictiveDist, p: float) -> float:
    return dist.quantile(p)


def _check_length(n: int):
    if n < 3:
        raise ParameterError(f"series length must be >= 3, got {n!r}")


def simulate_forward(params: Ar1Params, n: int, seed: SeedSpec) -> TimeSeries:
    """Stationary path ``y_1..y_n`` from stream ``seed.stream_index``."""
    _check_length(n)
    path = kernels.forward_paths(
        params.rho, params.sigma, n, int(seed.master_seed), int(seed.stream_index), 1
    )
    return TimeSeries(path[0])


def simulate_backward(params: Ar1Params, n: int, y_n: float, seed: SeedSpec) -> TimeSeries:
    """Path drawn from the law of ``(Y_1..Y_n)`` given ``Y_n = y_n``."""
    _check_length(n)
    path = kernels.backward_paths(
        params.rho, params.sigma, float(y_n), n,
        int(seed.master_seed), int(seed.stream_index), 1,
    )
    return TimeSeries(path[0])
