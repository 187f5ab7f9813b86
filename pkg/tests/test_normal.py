import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from predlim import normal

mpmath.mp.dps = 40


def exact_quantile(p):
    p = mpmath.mpf(p)
    start = mpmath.sqrt(2) * mpmath.erfinv(2 * p - 1) if 1e-15 < p < 1 - 1e-15 else (
        -mpmath.sqrt(-2 * mpmath.log(p)) if p < 0.5 else mpmath.sqrt(-2 * mpmath.log(1 - p)))
    if p < 0.5:
        return float(mpmath.findroot(lambda x: mpmath.log(mpmath.ncdf(x)) - mpmath.log(p), start))
    return float(mpmath.findroot(lambda x: mpmath.ncdf(x) - p, start))


@pytest.mark.parametrize("p", [1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.075, 0.3, 0.5,
                               0.7, 0.925, 0.975, 0.999, 1 - 1e-10])
def test_ndtri_matches_mpmath(p):
    assert normal.ndtri(p) == pytest.approx(exact_quantile(p), rel=1e-14, abs=1e-15)


def test_reference_quantiles():
    assert normal.ndtri(0.95) == pytest.approx(1.6448536269514722, abs=1e-15)
    assert normal.ndtri(0.975) == pytest.approx(1.959963984540054, abs=1e-15)
    assert normal.ndtri(0.5) == 0.0


@given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
def test_roundtrip(p):
    assert abs(normal.ndtr(normal.ndtri(p)) - p) <= 1e-9


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_ndtri_domain(p):
    with pytest.raises(ValueError):
        normal.ndtri(p)


def test_pdf_cdf_agree_with_mpmath():
    for x in np.linspace(-8, 8, 33):
        assert normal.ndtr(x) == pytest.approx(float(mpmath.ncdf(x)), rel=1e-13)
        assert normal.npdf(x) == pytest.approx(float(mpmath.npdf(x)), rel=1e-13)
    assert np.allclose(normal.ndtr_array([-1.0, 0.0, 2.0]),
                       [normal.ndtr(-1.0), 0.5, normal.ndtr(2.0)], rtol=1e-15)
