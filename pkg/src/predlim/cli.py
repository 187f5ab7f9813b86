"""Batch front end: JSON config in, CSV report (+ JSON sidecar) out.

Usage::

    predlim --config run.json --out results.csv [--seed N] [--workers K] [--overwrite]

The config's ``command`` selects one of ``simulate``, ``predict``, ``correct``,
``coverage``, ``scaling`` or ``efficiency``. Results never depend on the
worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .ar1_model import (
    MAX_SEED,
    Ar1Params,
    SeedSpec,
    TimeSeries,
    conditional_predictive,
    simulate_backward,
    simulate_forward,
)
from .correction import (
    Target,
    closed_form_c_interval,
    closed_form_c_limit,
    d_from_c,
    delta_from_c,
    simulated_c,
)
from .errors import ParameterError
from .estimators import EstimatorKind, estimate
from .harness import Method, coverage_table, efficiency_study, scaling_studies
from .prediction import (
    equal_density_interval,
    estimative_upper_limit,
    improved_interval,
    improved_upper_limit,
)
from .replicates import default_workers

logger = logging.getLogger("predlim")

COMMANDS = ("simulate", "predict", "correct", "coverage", "scaling", "efficiency")
ALL_METHODS = tuple(m.value for m in Method)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the key and constraint."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    rho: float | None = None
    sigma2: float = 1.0
    y_n: float | None = None
    alpha: float = 0.05
    k: int = 1
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    M: int = 1_000_000
    estimator: str = EstimatorKind.LEAST_SQUARES.value
    estimators: tuple[str, ...] | None = None
    correction: str = "closed"
    target: str = Target.LIMIT.value
    methods: tuple[str, ...] = ALL_METHODS
    series: tuple[float, ...] | None = None
    replicates: int = 1
    oracle: bool = False
    master_seed: int = 0
    worker_count: int = field(default_factory=default_workers)
    output: str | None = None

    @property
    def kinds(self) -> tuple[EstimatorKind, ...]:
        names = self.estimators if self.estimators else (self.estimator,)
        return tuple(EstimatorKind(k) for k in names)

    def to_json(self) -> dict:
        return asdict(self)


_FIELDS = {f for f in RunConfig.__dataclass_fields__}


def _number(cfg, key):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return value


def _integer(cfg, key, minimum):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise ConfigError(f"{key} is required for command {cfg['command']!r}")


def _estimator_name(value, key):
    try:
        return EstimatorKind.parse(value).value
    except ParameterError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Validate a JSON document and fill defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}")
    cfg = {k: v for k, v in raw.items() if v is not None}
    command = cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")
    out = {"command": command}

    for key in ("rho", "sigma2", "y_n", "alpha"):
        if key in cfg:
            out[key] = _number(cfg, key)
    if "rho" in out and not abs(out["rho"]) < 1.0:
        raise ConfigError("rho must satisfy |rho| < 1")
    if "sigma2" in out and not out["sigma2"] > 0.0:
        raise ConfigError("sigma2 must be > 0")
    if "alpha" in out and not 0.0 < out["alpha"] < 1.0:
        raise ConfigError("alpha must satisfy 0 < alpha < 1")
    for key, minimum in (("k", 1), ("n", 3), ("M", 1000), ("replicates", 1), ("worker_count", 1)):
        if key in cfg:
            out[key] = _integer(cfg, key, minimum)
    if "master_seed" in cfg:
        seed = _integer(cfg, "master_seed", 0)
        if seed > MAX_SEED:
            raise ConfigError("master_seed must fit in 64 bits")
        out["master_seed"] = seed
    if "n_grid" in cfg:
        grid = cfg["n_grid"]
        if not isinstance(grid, list) or not grid:
            raise ConfigError("n_grid must be a non-empty list of integers")
        values = tuple(_integer({"n_grid": g}, "n_grid", 3) for g in grid)
        if len(values) < 3 or any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("n_grid must hold >= 3 strictly increasing lengths")
        if values[-1] < 8 * values[0]:
            raise ConfigError("n_grid must span at least a factor of 8")
        out["n_grid"] = values
    if "estimator" in cfg:
        out["estimator"] = _estimator_name(cfg["estimator"], "estimator")
    if "estimators" in cfg:
        if not isinstance(cfg["estimators"], list) or not cfg["estimators"]:
            raise ConfigError("estimators must be a non-empty list")
        out["estimators"] = tuple(_estimator_name(e, "estimators") for e in cfg["estimators"])
    if "correction" in cfg:
        if cfg["correction"] not in ("closed", "simulated"):
            raise ConfigError("correction must be 'closed' or 'simulated'")
        out["correction"] = cfg["correction"]
    if "target" in cfg:
        if cfg["target"] not in ("limit", "interval"):
            raise ConfigError("target must be 'limit' or 'interval'")
        out["target"] = cfg["target"]
    if "methods" in cfg:
        methods = cfg["methods"]
        if not isinstance(methods, list) or not methods or any(m not in ALL_METHODS for m in methods):
            raise ConfigError(f"methods must be a non-empty list drawn from {', '.join(ALL_METHODS)}")
        out["methods"] = tuple(methods)
    if "series" in cfg:
        series = cfg["series"]
        if not isinstance(series, list) or len(series) < 3:
            raise ConfigError("series must be a list of at least 3 numbers")
        out["series"] = tuple(_number({"series": v}, "series") for v in series)
    if "oracle" in cfg:
        if not isinstance(cfg["oracle"], bool):
            raise ConfigError("oracle must be true or false")
        out["oracle"] = cfg["oracle"]
    if "output" in cfg:
        out["output"] = str(cfg["output"])

    config = RunConfig(**out)
    _check_command(config, out)
    return config


def _check_command(config: RunConfig, given: dict):
    c = config.command
    need = {
        "simulate": ("rho", "n"),
        "predict": ("y_n", "n") if config.series is None else (),
        "correct": ("rho", "y_n", "n"),
        "coverage": ("rho", "y_n", "n"),
        "scaling": ("rho", "y_n", "n_grid"),
        "efficiency": ("rho", "y_n"),
    }[c]
    _require({"command": c, **given}, *need)
    if c == "predict" and config.series is None and config.rho is None:
        raise ConfigError("predict needs either rho or series")
    if c == "efficiency" and config.n is None and config.n_grid is None:
        raise ConfigError("efficiency needs n or n_grid")

    closed = config.correction == "closed"
    if c in ("predict", "correct") and closed:
        kind = EstimatorKind(config.estimator)
        if config.k != 1:
            raise ConfigError("closed-form correction requires k = 1")
        limit_needed = c == "predict" or config.target == "limit"
        if limit_needed and not kind.has_conditional_bias:
            raise ConfigError(
                f"no closed-form conditional bias for {kind.value}; set correction to 'simulated'"
            )
    if c == "coverage" and closed and "improved_limit" in config.methods:
        for kind in config.kinds:
            if not kind.has_conditional_bias:
                raise ConfigError(f"no closed-form conditional bias for {kind.value}")
    if c == "scaling" and "improved_limit" in config.methods:
        if not EstimatorKind(config.estimator).has_conditional_bias:
            raise ConfigError(f"no closed-form conditional bias for {config.estimator}")
    if c == "efficiency":
        kinds = config.estimators or ()
        if len(kinds) < 2:
            raise ConfigError("estimators must list at least two kinds for efficiency")
        for kind in config.kinds:
            if not kind.has_conditional_bias:
                raise ConfigError(f"no closed-form conditional bias for {kind.value}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class _Table:
    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, **values):
        self.rows.append([_fmt(values.get(c)) for c in self.columns])

    def render(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()


def _params(cfg: RunConfig) -> Ar1Params:
    return Ar1Params(cfg.rho, cfg.sigma2)


def _run_simulate(cfg, failures):
    table = _Table(["replicate", "t", "value"])
    params = _params(cfg)
    for rep in range(cfg.replicates):
        seed = SeedSpec(cfg.master_seed, rep)
        if cfg.y_n is None:
            series = simulate_forward(params, cfg.n, seed)
        else:
            series = simulate_backward(params, cfg.n, cfg.y_n, seed)
        for t, v in enumerate(series.values, start=1):
            table.add(replicate=rep, t=t, value=float(v))
    return table


def _run_predict(cfg, failures):
    kind = EstimatorKind(cfg.estimator)
    if cfg.series is not None:
        series = TimeSeries(np.array(cfg.series))
        rho_hat = estimate(kind, series)
        y_n = series.last
        n = series.n
    else:
        rho_hat, y_n, n = cfg.rho, cfg.y_n, cfg.n
    theta = Ar1Params(rho_hat, cfg.sigma2)
    if cfg.correction == "closed":
        c_lim = closed_form_c_limit(theta, y_n, cfg.alpha, n, kind)
        c_int = closed_form_c_interval(theta, y_n, cfg.alpha, n, kind)
    else:
        c_lim = simulated_c(theta, y_n, cfg.alpha, n, cfg.M, kind, Target.LIMIT,
                            cfg.master_seed, cfg.worker_count, cfg.k)
        c_int = simulated_c(theta, y_n, cfg.alpha, n, cfg.M, kind, Target.INTERVAL,
                            cfg.master_seed, cfg.worker_count, cfg.k)
    est = estimative_upper_limit(theta, y_n, cfg.k, cfg.alpha)
    imp = improved_upper_limit(theta, y_n, cfg.k, cfg.alpha, c_lim)
    est_i = equal_density_interval(conditional_predictive(theta, y_n, cfg.k), cfg.alpha)
    imp_i = improved_interval(theta, y_n, cfg.k, cfg.alpha, c_int)
    table = _Table(["kind", "rho_hat", "sigma2", "y_n", "alpha", "k", "n", "correction",
                    "estimative_limit", "improved_limit", "estimative_lower",
                    "estimative_upper", "improved_lower", "improved_upper",
                    "c_limit", "c_interval"])
    table.add(kind=kind.value, rho_hat=rho_hat, sigma2=cfg.sigma2, y_n=y_n, alpha=cfg.alpha,
              k=cfg.k, n=n, correction=cfg.correction, estimative_limit=est.value,
              improved_limit=imp.value, estimative_lower=est_i.lower,
              estimative_upper=est_i.upper, improved_lower=imp_i.lower,
              improved_upper=imp_i.upper, c_limit=c_lim.c_over_n, c_interval=c_int.c_over_n)
    return table


def _run_correct(cfg, failures):
    table = _Table(["kind", "target", "source", "rho", "sigma2", "y_n", "alpha", "n", "M",
                    "c_over_n", "std_error", "shift", "seed"])
    params = _params(cfg)
    target = Target(cfg.target)
    for kind in cfg.kinds:
        try:
            if cfg.correction == "closed":
                fn = closed_form_c_limit if target is Target.LIMIT else closed_form_c_interval
                corr = fn(params, cfg.y_n, cfg.alpha, cfg.n, kind)
                m = None
            else:
                corr = simulated_c(params, cfg.y_n, cfg.alpha, cfg.n, cfg.M, kind, target,
                                   cfg.master_seed, cfg.worker_count, cfg.k)
                m = cfg.M
        except (ArithmeticError, ValueError) as exc:
            failures.append(f"{kind.value}: {exc}")
            continue
        dist = conditional_predictive(params, cfg.y_n, cfg.k)
        if target is Target.LIMIT:
            shift = d_from_c(corr, dist.pdf(dist.quantile(1.0 - cfg.alpha)))
        else:
            shift = delta_from_c(corr, dist.pdf(equal_density_interval(dist, cfg.alpha).upper))
        table.add(kind=kind.value, target=target.value, source=corr.source.value,
                  rho=cfg.rho, sigma2=cfg.sigma2, y_n=cfg.y_n, alpha=cfg.alpha, n=cfg.n, M=m,
                  c_over_n=corr.c_over_n, std_error=corr.std_error, shift=shift,
                  seed=cfg.master_seed)
    return table


def _run_coverage(cfg, failures):
    table = _Table(["method", "kind", "rho", "sigma2", "y_n", "alpha", "n", "M",
                    "coverage", "std_error", "seed"])
    reports = coverage_table(cfg.methods, cfg.kinds, _params(cfg), cfg.y_n, cfg.alpha, cfg.n,
                             cfg.M, cfg.master_seed, cfg.worker_count, cfg.oracle,
                             cfg.correction)
    for r in reports:
        table.add(method=r.method.value, kind=r.kind.value, rho=cfg.rho, sigma2=cfg.sigma2,
                  y_n=cfg.y_n, alpha=cfg.alpha, n=r.n, M=r.M, coverage=r.coverage,
                  std_error=r.std_error, seed=cfg.master_seed)
    return table


def _run_scaling(cfg, failures):
    table = _Table(["row", "method", "kind", "rho", "sigma2", "y_n", "alpha", "n", "M",
                    "coverage", "error", "std_error", "predicted_error", "slope",
                    "slope_std_error", "note", "seed"])
    common = dict(kind=cfg.estimator, rho=cfg.rho, sigma2=cfg.sigma2, y_n=cfg.y_n,
                  alpha=cfg.alpha, M=cfg.M, seed=cfg.master_seed)
    reports = scaling_studies(cfg.methods, cfg.estimator, _params(cfg), cfg.y_n, cfg.alpha,
                              cfg.n_grid, cfg.M, cfg.master_seed, cfg.worker_count, cfg.oracle)
    for rep in reports:
        for i, n in enumerate(rep.n_grid):
            table.add(row="data", method=rep.method.value, n=n, coverage=rep.coverages[i],
                      error=rep.errors[i], std_error=rep.std_errors[i],
                      predicted_error=rep.predicted[i] if rep.predicted else None,
                      note="excluded" if n in rep.excluded else None, **common)
        table.add(row="slope", method=rep.method.value, slope=rep.slope,
                  slope_std_error=rep.slope_std_error, note="; ".join(rep.notes) or None,
                  **common)
    return table


def _run_efficiency(cfg, failures):
    table = _Table(["row", "kind", "target", "rho", "sigma2", "y_n", "alpha", "n", "M",
                    "estimative", "estimative_se", "improved", "improved_se", "theory", "seed"])
    grid = cfg.n_grid if cfg.n_grid else (cfg.n,)
    for n in grid:
        rep = efficiency_study(_params(cfg), cfg.y_n, cfg.alpha, n, cfg.M, cfg.kinds,
                               cfg.target, cfg.master_seed, cfg.worker_count)
        common = dict(target=cfg.target, rho=cfg.rho, sigma2=cfg.sigma2, y_n=cfg.y_n,
                      alpha=cfg.alpha, n=n, M=cfg.M, seed=cfg.master_seed)
        for kind, eff in rep.per_kind.items():
            table.add(row="mean", kind=kind.value, estimative=eff.estimative_mean,
                      estimative_se=eff.estimative_se, improved=eff.improved_mean,
                      improved_se=eff.improved_se, theory=rep.theory_improved, **common)
        for (a, b), (de, dse, di, dise) in rep.differences.items():
            table.add(row="diff", kind=f"{a.value}-{b.value}", estimative=de,
                      estimative_se=dse, improved=di, improved_se=dise, **common)
    return table


_RUNNERS = {
    "simulate": _run_simulate,
    "predict": _run_predict,
    "correct": _run_correct,
    "coverage": _run_coverage,
    "scaling": _run_scaling,
    "efficiency": _run_efficiency,
}


def run(config: RunConfig, out: Path, overwrite: bool = False) -> int:
    """Execute ``config`` and write ``out`` plus ``out.json``; returns the exit status."""
    out = Path(out)
    sidecar = out.with_name(out.name + ".json")
    if not overwrite:
        for path in (out, sidecar):
            if path.exists():
                print(f"error: {path} exists; pass --overwrite to replace it", file=sys.stderr)
                return 2
    failures: list[str] = []
    try:
        table = _RUNNERS[config.command](config, failures)
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {config.command} failed: {exc}", file=sys.stderr)
        return 1
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(table.render())
        meta = {
            "tool": "predlim",
            "version": __version__,
            "backend": BACKEND,
            "python": platform.python_version(),
            "config": config.to_json(),
            "failed_cells": failures,
        }
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    for f in failures:
        print(f"failed cell: {f}", file=sys.stderr)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predlim",
        description="Estimative and improved AR(1) prediction limits/intervals and their "
                    "conditional coverage.",
    )
    parser.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    parser.add_argument("--out", type=Path, help="CSV output path (default: config 'output')")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--workers", type=int, help="worker threads (never changes results)")
    parser.add_argument("--overwrite", action="store_true", help="replace existing outputs")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
        overrides = {}
        if args.seed is not None:
            if not 0 <= args.seed <= MAX_SEED:
                raise ConfigError("--seed must fit in 64 bits")
            overrides["master_seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            overrides["worker_count"] = args.workers
        config = replace(config, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or (Path(config.output) if config.output else None)
    if out is None:
        print("error: no output path (use --out or the 'output' key)", file=sys.stderr)
        return 2
    return run(config, out, args.overwrite)


if __name__ == "__main__":
    sys.exit(main())
