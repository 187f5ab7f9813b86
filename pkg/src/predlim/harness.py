"""Monte-Carlo checks of conditional coverage and efficiency.

Every study draws series conditionally on ``Y_n = y_n`` through the backward
recursion and scores each replicate by the exact predictive probability of the
region it produced, so the only Monte-Carlo noise comes from ``rho_hat``.
Methods and estimator kinds evaluated in one call share the same series
(common random numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import normal
from .ar1_model import Ar1Params, conditional_predictive
from .correction import (
    MIN_REPLICATES,
    Target,
    closed_form_c_interval,
    closed_form_c_limit,
    coverage_mass,
    interval_shift,
    limit_shift,
    mean_and_se,
    simulated_c,
)
from .errors import ParameterError
from .estimators import EstimatorKind, bias_coefficient, estimate_from_stats
from .replicates import backward_replicates

NESTED_CLIP = 0.999


class Method(str, Enum):
    ESTIMATIVE_LIMIT = "estimative_limit"
    IMPROVED_LIMIT = "improved_limit"
    ESTIMATIVE_INTERVAL = "estimative_interval"
    IMPROVED_INTERVAL = "improved_interval"

    @property
    def target(self) -> Target:
        return Target.LIMIT if self.value.endswith("limit") else Target.INTERVAL

    @property
    def improved(self) -> bool:
        return self.value.startswith("improved")


@dataclass(frozen=True)
class CoverageReport:
    method: Method
    kind: EstimatorKind
    params: Ar1Params
    y_n: float
    alpha: float
    n: int
    M: int
    coverage: float
    std_error: float

    @property
    def error(self) -> float:
        return self.coverage - (1.0 - self.alpha)


@dataclass(frozen=True)
class ScalingReport:
    method: Method
    kind: EstimatorKind
    n_grid: tuple[int, ...]
    coverages: tuple[float, ...]
    errors: tuple[float, ...]
    std_errors: tuple[float, ...]
    slope: float | None
    slope_std_error: float | None
    excluded: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()
    predicted: tuple[float, ...] | None = None


@dataclass(frozen=True)
class KindEfficiency:
    kind: EstimatorKind
    estimative_mean: float
    estimative_se: float
    improved_mean: float
    improved_se: float


@dataclass(frozen=True)
class EfficiencyReport:
    """Conditional means of limits (or interval lengths) per estimator.

    ``differences`` maps ``(kind_a, kind_b)`` to paired differences
    ``(estimative, estimative_se, improved, improved_se)`` of ``a - b``.
    """

    target: Target
    params: Ar1Params
    y_n: float
    alpha: float
    n: int
    M: int
    per_kind: dict
    differences: dict
    theory_improved: float
    theory_estimative: dict = field(default_factory=dict)


def _validate(params, alpha, n, M):
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n < 3:
        raise ParameterError(f"series length must be >= 3, got {n!r}")
    if M < MIN_REPLICATES:
        raise ParameterError(f"M must be >= {MIN_REPLICATES}, got {M}")


def _master(seed) -> int:
    return int(getattr(seed, "master_seed", seed))


def _nested_seed(master: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _nested_shift(method, kind, rho_hat, params, y_n, alpha, n, inner_M, master):
    """Per-replicate shift from a nested simulated correction (slow)."""
    shifts = np.empty(rho_hat.size)
    z = normal.ndtri(1.0 - alpha if method.target is Target.LIMIT else 1.0 - 0.5 * alpha)
    for i, r in enumerate(rho_hat):
        plug = Ar1Params(float(np.clip(r, -NESTED_CLIP, NESTED_CLIP)), params.sigma2)
        corr = simulated_c(plug, y_n, alpha, n, inner_M, kind, method.target,
                           _nested_seed(master, i), workers=1)
        dens = normal.npdf(z) / plug.sigma
        shifts[i] = -corr.c_over_n / dens
        if method.target is Target.INTERVAL:
            shifts[i] *= 0.5
    return shifts


def _shift(method, kind, rho_hat, params, y_n, alpha, n, correction, inner_M, master):
    if not method.improved:
        return 0.0
    if correction == "simulated":
        return _nested_shift(method, kind, rho_hat, params, y_n, alpha, n, inner_M, master)
    if method.target is Target.LIMIT:
        return limit_shift(kind, rho_hat, params.sigma2, y_n, alpha, n)
    return interval_shift(rho_hat, params.sigma2, y_n, alpha, n)


def coverage_table(methods: Iterable[Method], kinds: Iterable[EstimatorKind],
                   params_true: Ar1Params, y_n: float, alpha: float, n: int, M: int,
                   seed, workers: int | None = None, oracle: bool = False,
                   correction: str = "closed", inner_M: int = 10_000) -> list[CoverageReport]:
    """Coverage of several methods/estimators on one shared set of series.

    ``oracle=True`` freezes ``rho_hat`` at the true value (no simulation). With
    nothing estimated there is no defect to correct, so improved methods
    reduce to their estimative counterparts.
    ``correction="simulated"`` recomputes each replicate's improved shift by a
    nested simulation of ``inner_M`` series; this is expensive and meant for
    spot checks only.
    """
    _validate(params_true, alpha, n, M)
    methods = [Method(m) for m in methods]
    kinds = [EstimatorKind.parse(k) for k in kinds]
    y_n = float(y_n)
    master = _master(seed)
    stats = None if oracle else backward_replicates(params_true, n, y_n, M, master, workers)
    reports = []
    for kind in kinds:
        if oracle:
            rho_hat = np.full(M, params_true.rho)
        else:
            rho_hat = estimate_from_stats(kind, stats)
        for method in methods:
            if method.improved and correction == "closed" and not kind.has_conditional_bias \
                    and method.target is Target.LIMIT:
                raise ParameterError(
                    f"no closed-form conditional bias for {kind.value}; use correction='simulated'"
                )
            if oracle:
                shift = 0.0
            else:
                shift = _shift(method, kind, rho_hat, params_true, y_n, alpha, n,
                               correction, inner_M, master)
            mass = coverage_mass(rho_hat, params_true, y_n, alpha, method.target, shift=shift)
            cov, se = mean_and_se(mass)
            reports.append(CoverageReport(method, kind, params_true, y_n, alpha, n, M, cov, se))
    return reports


def conditional_coverage(method: Method, kind: EstimatorKind, params_true: Ar1Params,
                         y_n: float, alpha: float, n: int, M: int, seed,
                         workers: int | None = None, oracle: bool = False,
                         correction: str = "closed", inner_M: int = 10_000) -> CoverageReport:
    return coverage_table([method], [kind], params_true, y_n, alpha, n, M, seed,
                          workers, oracle, correction, inner_M)[0]


def fit_loglog_slope(n_grid: Sequence[int], errors: Sequence[float],
                     std_errors: Sequence[float], min_signal: float = 2.0):
    """Weighted least-squares slope of ``log|error|`` on ``log n``.

    The weight of each point is ``1 / se_log^2`` with ``se_log = se / |error|``
    (delta method). Points with ``|error| < min_signal * se`` are
    noise-dominated and left out. Returns ``(slope, slope_se, excluded, notes)``.
    """
    x, y, w, excluded, notes = [], [], [], [], []
    for n, e, s in zip(n_grid, errors, std_errors):
        if abs(e) < min_signal * s or e == 0.0:
            excluded.append(n)
            notes.append(f"n={n}: |error| {abs(e):.3g} within {min_signal:g} SE ({s:.3g}); noise-dominated")
            continue
        x.append(math.log(n))
        y.append(math.log(abs(e)))
        w.append(1.0 / (s / abs(e)) ** 2 if s > 0.0 else 1e300)
    if len(x) < 2:
        notes.append("fewer than two usable points; no slope fitted")
        return None, None, tuple(excluded), tuple(notes)
    x, y, w = np.array(x), np.array(y), np.array(w)
    xb = np.sum(w * x) / np.sum(w)
    yb = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xb) ** 2)
    slope = float(np.sum(w * (x - xb) * (y - yb)) / sxx)
    return slope, float(math.sqrt(1.0 / sxx)), tuple(excluded), tuple(notes)


def _check_grid(n_grid):
    grid = tuple(int(n) for n in n_grid)
    if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("n_grid needs at least 3 strictly increasing lengths")
    if grid[-1] < 8 * grid[0]:
        raise ParameterError("n_grid must span at least a factor of 8")
    return grid


def scaling_studies(methods: Iterable[Method], kind: EstimatorKind, params_true: Ar1Params,
                    y_n: float, alpha: float, n_grid: Sequence[int], M: int, seed,
                    workers: int | None = None, oracle: bool = False) -> list[ScalingReport]:
    """Coverage error against n for several methods sharing the same series."""
    grid = _check_grid(n_grid)
    methods = [Method(m) for m in methods]
    kind = EstimatorKind.parse(kind)
    per_n = [coverage_table(methods, [kind], params_true, y_n, alpha, n, M, seed,
                            workers, oracle) for n in grid]
    reports = []
    for j, method in enumerate(methods):
        rows = [cells[j] for cells in per_n]
        cov = tuple(r.coverage for r in rows)
        err = tuple(r.error for r in rows)
        se = tuple(r.std_error for r in rows)
        predicted = None
        if not method.improved and kind.has_conditional_bias:
            fn = closed_form_c_limit if method.target is Target.LIMIT else closed_form_c_interval
            predicted = tuple(fn(params_true, y_n, alpha, n, kind).c_over_n for n in grid)
        if oracle:
            notes = ("oracle mode: parameters known, no slope fitted",)
            reports.append(ScalingReport(method, kind, grid, cov, err, se, None, None,
                                         (), notes, predicted))
            continue
        slope, slope_se, excluded, notes = fit_loglog_slope(grid, err, se)
        reports.append(ScalingReport(method, kind, grid, cov, err, se, slope, slope_se,
                                     excluded, notes, predicted))
    return reports


def scaling_study(method: Method, kind: EstimatorKind, params_true: Ar1Params, y_n: float,
                  alpha: float, n_grid: Sequence[int], M: int, seed,
                  workers: int | None = None, oracle: bool = False) -> ScalingReport:
    return scaling_studies([method], kind, params_true, y_n, alpha, n_grid, M, seed,
                           workers, oracle)[0]


def theoretical_efficiency(params: Ar1Params, y_n: float, alpha: float, n: int,
                           target: Target) -> float:
    """Second-order conditional mean of the improved limit (or interval length).

    Neither expression contains the estimator's conditional bias.
    """
    target = Target(target)
    sigma = params.sigma
    info = (1.0 - params.rho ** 2) / n
    if target is Target.LIMIT:
        z = normal.ndtri(1.0 - alpha)
        base = conditional_predictive(params, y_n, 1).quantile(1.0 - alpha)
        return base + z / (2.0 * sigma) * y_n * y_n * info
    z = normal.ndtri(1.0 - 0.5 * alpha)
    return 2.0 * sigma * z + z * y_n * y_n * info / sigma


def _region_size(rho_hat, params, y_n, alpha, target, shift):
    """Upper limit, or interval length, built at ``rho_hat`` (k = 1, sigma known)."""
    sigma = params.sigma
    if target is Target.LIMIT:
        return rho_hat * y_n + sigma * normal.ndtri(1.0 - alpha) + shift
    return np.full(rho_hat.shape, 2.0 * sigma * normal.ndtri(1.0 - 0.5 * alpha)) + 2.0 * shift


def efficiency_study(params_true: Ar1Params, y_n: float, alpha: float, n: int, M: int,
                     kinds: Iterable[EstimatorKind], target: Target, seed,
                     workers: int | None = None) -> EfficiencyReport:
    """Conditional expected limits/lengths per estimator with common random numbers."""
    _validate(params_true, alpha, n, M)
    target = Target(target)
    kinds = [EstimatorKind.parse(k) for k in kinds]
    if len(kinds) < 2 or not all(k.has_conditional_bias for k in kinds):
        raise ParameterError("efficiency_study needs >= 2 estimators with known conditional bias")
    y_n = float(y_n)
    stats = backward_replicates(params_true, n, y_n, M, _master(seed), workers)
    sizes = {}
    per_kind = {}
    for kind in kinds:
        rho_hat = estimate_from_stats(kind, stats)
        if target is Target.LIMIT:
            shift = limit_shift(kind, rho_hat, params_true.sigma2, y_n, alpha, n)
        else:
            shift = interval_shift(rho_hat, params_true.sigma2, y_n, alpha, n)
        est = _region_size(rho_hat, params_true, y_n, alpha, target, 0.0)
        imp = _region_size(rho_hat, params_true, y_n, alpha, target, shift)
        sizes[kind] = (est, imp)
        per_kind[kind] = KindEfficiency(kind, *mean_and_se(est), *mean_and_se(imp))
    differences = {}
    for i, a in enumerate(kinds):
        for b in kinds[i + 1:]:
            de = mean_and_se(sizes[a][0] - sizes[b][0])
            di = mean_and_se(sizes[a][1] - sizes[b][1])
            differences[(a, b)] = (*de, *di)
    theory_est = {}
    if target is Target.LIMIT:
        base = conditional_predictive(params_true, y_n, 1).quantile(1.0 - alpha)
        for kind in kinds:
            b = bias_coefficient(kind, params_true.rho, params_true.sigma2, y_n)
            theory_est[kind] = float(base + y_n * b / n)
    return EfficiencyReport(target, params_true, y_n, alpha, n, M, per_kind, differences,
                            theoretical_efficiency(params_true, y_n, alpha, n, target),
                            theory_est)
