import math

import numpy as np
import pytest

from predlim import Ar1Params, EstimatorKind, ParameterError
from predlim.correction import Target, closed_form_c_limit
from predlim.harness import (CoverageReport, Method, conditional_coverage, coverage_table,
                             efficiency_study, fit_loglog_slope, scaling_study,
                             theoretical_efficiency)
from predlim.normal import ndtri
from predlim.replicates import backward_replicates

LS = EstimatorKind.LEAST_SQUARES
YW = EstimatorKind.YULE_WALKER
BC = EstimatorKind.BACKWARD_CONDITIONAL
ALL = list(Method)


def test_method_properties():
    assert Method.IMPROVED_INTERVAL.target is Target.INTERVAL and Method.IMPROVED_INTERVAL.improved
    assert Method.ESTIMATIVE_LIMIT.target is Target.LIMIT and not Method.ESTIMATIVE_LIMIT.improved


@pytest.mark.parametrize("method", ALL)
def test_oracle_mode_is_exact(method):
    rep = conditional_coverage(method, LS, Ar1Params(0.5, 1.0), 2.0, 0.05, 50, 5000, 1, oracle=True)
    assert abs(rep.error) < 1e-12
    assert rep.std_error == 0.0


def test_report_invariants():
    reps = coverage_table(ALL, [LS, BC], Ar1Params(0.8, 1.0), 2.0, 0.05, 30, 20_000, 4)
    for r in reps:
        assert isinstance(r, CoverageReport)
        assert 0.0 <= r.coverage <= 1.0
        assert r.std_error <= 0.5 / math.sqrt(r.M)


def test_validation():
    p = Ar1Params(0.5, 1.0)
    with pytest.raises(ParameterError):
        conditional_coverage(Method.ESTIMATIVE_LIMIT, LS, p, 1.0, 0.05, 50, 999, 1)
    with pytest.raises(ParameterError, match="simulated"):
        conditional_coverage(Method.IMPROVED_LIMIT, YW, p, 1.0, 0.05, 50, 1000, 1)
    with pytest.raises(ParameterError):
        scaling_study(Method.ESTIMATIVE_LIMIT, LS, p, 1.0, 0.1, [25, 50], 1000, 1)
    with pytest.raises(ParameterError):
        scaling_study(Method.ESTIMATIVE_LIMIT, LS, p, 1.0, 0.1, [25, 50, 100], 1000, 1)
    with pytest.raises(ParameterError):
        scaling_study(Method.ESTIMATIVE_LIMIT, LS, p, 1.0, 0.1, [25, 200, 100], 1000, 1)
    with pytest.raises(ParameterError):
        efficiency_study(p, 2.0, 0.05, 50, 1000, [LS, YW], Target.LIMIT, 1)


def test_first_order_prediction_moderate_m():
    p = Ar1Params(0.5, 1.0)
    rep = conditional_coverage(Method.ESTIMATIVE_LIMIT, LS, p, 2.0, 0.05, 50, 200_000, 3)
    predicted = 0.95 + closed_form_c_limit(p, 2.0, 0.05, 50, LS).c_over_n
    assert abs(rep.coverage - predicted) <= 4 * rep.std_error + 0.001


@pytest.mark.slow
def test_improved_limit_beats_estimative_by_a_factor_three():
    est, imp = coverage_table([Method.ESTIMATIVE_LIMIT, Method.IMPROVED_LIMIT], [LS],
                              Ar1Params(0.5, 1.0), 2.0, 0.05, 50, 1_000_000, 5)
    assert abs(imp.error) < abs(est.error) / 3


@pytest.mark.slow
def test_improved_never_worse_on_grid():
    worse = []
    for rho in (0.0, 0.5, 0.8):
        for y in (0.0, 1.0, 2.0):
            for n in (25, 50, 100, 200):
                reps = {r.method: r for r in coverage_table(ALL, [LS], Ar1Params(rho, 1.0), y,
                                                            0.05, n, 100_000, 1000 + n)}
                for e, i in ((Method.ESTIMATIVE_LIMIT, Method.IMPROVED_LIMIT),
                             (Method.ESTIMATIVE_INTERVAL, Method.IMPROVED_INTERVAL)):
                    se = math.hypot(reps[e].std_error, reps[i].std_error)
                    if abs(reps[i].error) > abs(reps[e].error) + 2 * se:
                        worse.append((rho, y, n, i.value, reps[e].error, reps[i].error, se))
    assert not worse, worse


@pytest.mark.slow
def test_scaled_error_converges_to_closed_form():
    p, y, alpha = Ar1Params(0.5, 1.0), 2.0, 0.05
    for n in (25, 50, 100, 200):
        rep = conditional_coverage(Method.ESTIMATIVE_LIMIT, LS, p, y, alpha, n, 200_000, 2000 + n)
        c = n * closed_form_c_limit(p, y, alpha, n, LS).c_over_n
        assert abs(n * rep.error - c) <= 4 * n * rep.std_error + 1.0 / n, (n, n * rep.error, c)


def test_common_random_numbers():
    p = Ar1Params(0.5, 1.0)
    joint = coverage_table([Method.ESTIMATIVE_LIMIT], [LS, BC], p, 1.0, 0.1, 40, 5000, 8)
    alone = conditional_coverage(Method.ESTIMATIVE_LIMIT, BC, p, 1.0, 0.1, 40, 5000, 8)
    assert joint[1] == alone
    # the series themselves do not depend on which estimator is applied
    a = backward_replicates(p, 40, 1.0, 5000, 8)
    b = backward_replicates(p, 40, 1.0, 5000, 8)
    assert a.sxy.tobytes() == b.sxy.tobytes() and a.smid.tobytes() == b.smid.tobytes()


def test_fit_loglog_slope_exact_power():
    grid = [25, 50, 100, 200]
    errors = [3.0 / n for n in grid]
    slope, slope_se, excluded, notes = fit_loglog_slope(grid, errors, [1e-6] * 4)
    assert slope == pytest.approx(-1.0, abs=1e-9)
    assert excluded == () and slope_se > 0


def test_fit_loglog_slope_excludes_noise():
    slope, _, excluded, notes = fit_loglog_slope([25, 50, 100, 200], [1e-2, 5e-3, 1e-5, 0.0],
                                                 [1e-4, 1e-4, 1e-4, 1e-4])
    assert excluded == (100, 200)
    assert any("noise-dominated" in s for s in notes)
    assert slope == pytest.approx(-1.0, abs=1e-9)
    slope, slope_se, excluded, notes = fit_loglog_slope([25, 50, 100], [0.0, 0.0, 1e-5], [1e-4] * 3)
    assert slope is None and slope_se is None and "no slope" in notes[-1]


def test_scaling_oracle_mode():
    rep = scaling_study(Method.IMPROVED_INTERVAL, LS, Ar1Params(0.5, 1.0), 1.0, 0.1,
                        [25, 50, 100, 200], 2000, 1, oracle=True)
    assert rep.slope is None
    assert all(abs(e) <= 4 * s + 1e-12 and abs(e) < 1e-12 for e, s in zip(rep.errors, rep.std_errors))


def test_scaling_reports_prediction():
    p = Ar1Params(0.5, 1.0)
    rep = scaling_study(Method.ESTIMATIVE_LIMIT, LS, p, 1.0, 0.1, [25, 50, 200], 20_000, 3)
    assert rep.n_grid == (25, 50, 200) and len(rep.errors) == 3
    assert rep.predicted[0] == closed_form_c_limit(p, 1.0, 0.1, 25, LS).c_over_n


def test_theoretical_efficiency_values():
    p = Ar1Params(0.5, 1.0)
    z = ndtri(0.95)
    assert theoretical_efficiency(p, 2.0, 0.05, 100, Target.LIMIT) == pytest.approx(1 + z + 0.0246728, abs=1e-7)
    z2 = ndtri(0.975)
    assert theoretical_efficiency(p, 2.0, 0.05, 100, Target.INTERVAL) == pytest.approx(
        2 * z2 + z2 * 4 * 0.75 / 100, rel=1e-14)


def test_efficiency_differences_are_paired():
    p = Ar1Params(0.5, 1.0)
    rep = efficiency_study(p, 2.0, 0.05, 100, 20_000, [LS, BC], Target.LIMIT, 6)
    est, est_se, imp, imp_se = rep.differences[(LS, BC)]
    a, b = rep.per_kind[LS], rep.per_kind[BC]
    assert est == pytest.approx(a.estimative_mean - b.estimative_mean, abs=1e-12)
    # pairing makes the difference far sharper than independent runs would
    assert est_se < 0.5 * math.hypot(a.estimative_se, b.estimative_se)
    assert imp_se >= 0.0
    assert rep.theory_estimative[BC] - rep.theory_estimative[LS] == pytest.approx(-0.02)


def test_interval_efficiency_lengths():
    p = Ar1Params(0.5, 1.0)
    rep = efficiency_study(p, 2.0, 0.05, 100, 20_000, [LS, BC], Target.INTERVAL, 6)
    # estimative length is 2 sigma z for every replicate
    assert rep.per_kind[LS].estimative_se == 0.0
    assert rep.differences[(LS, BC)][0] == 0.0
    assert rep.per_kind[LS].improved_mean == pytest.approx(rep.theory_improved, abs=0.002)


@pytest.mark.slow
def test_nested_simulated_correction_mode():
    p = Ar1Params(0.5, 1.0)
    closed = conditional_coverage(Method.IMPROVED_LIMIT, LS, p, 2.0, 0.05, 50, 2000, 12)
    nested = conditional_coverage(Method.IMPROVED_LIMIT, LS, p, 2.0, 0.05, 50, 2000, 12,
                                  correction="simulated", inner_M=2000)
    assert abs(nested.coverage - closed.coverage) < 0.002
    yw = conditional_coverage(Method.IMPROVED_LIMIT, YW, p, 2.0, 0.05, 50, 2000, 12,
                              correction="simulated", inner_M=2000)
    assert math.isfinite(yw.coverage)
