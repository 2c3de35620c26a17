import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rstcnn.bessel import (
    UnsupportedOrderError,
    bessel_j,
    bessel_j_derivative,
    bessel_j_over_x,
    bessel_zero,
)

# 17-digit values computed with mpmath at 25-digit precision.
J_TABLE = [
    (0, 0.5, 0.9384698072408129),
    (1, 1.0, 0.44005058574493352),
    (2, 7.3, -0.26559491188343691),
    (3, 0.1, 2.0820315754756265e-5),
    (5, 3.2, 0.056238012615117927),
    (8, 20.0, -0.073868928840750341),
    (0, 30.0, -0.086367983581040211),
    (4, 12.5, 0.22616536886967031),
    (12, 9.0, 0.027392888670559681),
]

ZERO_TABLE = [
    (0, 1, 2.4048255576957728),
    (0, 2, 5.5200781102863106),
    (1, 1, 3.8317059702075123),
    (2, 1, 5.1356223018406826),
    (3, 4, 16.223466160318768),
    (8, 8, 36.025615063869571),
    (5, 2, 12.338604197466944),
]

DERIV_TABLE = [
    (0, 1.7, -0.57776523152902322),
    (1, 0.3, 0.48323019229461606),
    (4, 9.1, -0.040789879830195933),
]


@pytest.mark.parametrize("m,x,expected", J_TABLE)
def test_bessel_j_frozen_values(m, x, expected):
    assert bessel_j(m, x) == pytest.approx(expected, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("m,q,expected", ZERO_TABLE)
def test_bessel_zero_frozen_values(m, q, expected):
    assert bessel_zero(m, q) == pytest.approx(expected, rel=0, abs=1e-10)


@pytest.mark.parametrize("m,x,expected", DERIV_TABLE)
def test_bessel_j_derivative_frozen_values(m, x, expected):
    assert bessel_j_derivative(m, x) == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_scipy_cross_check():
    scipy_special = pytest.importorskip("scipy.special")
    xs = np.linspace(0.01, 40.0, 173)
    for m in range(0, 13):
        ours = np.array([bessel_j(m, x) for x in xs])
        theirs = scipy_special.jv(m, xs)
        assert np.abs(ours - theirs).max() < 1e-12
    for m in range(9):
        theirs = scipy_special.jn_zeros(m, 8)
        ours = np.array([bessel_zero(m, q) for q in range(1, 9)])
        assert np.abs(ours - theirs).max() < 1e-9


def test_special_points():
    assert bessel_j(0, 0.0) == 1.0
    for m in range(1, 9):
        assert bessel_j(m, 0.0) == 0.0
    # J_m(x)/x at 0: 1/2 for m = 1, 0 otherwise
    assert bessel_j_over_x(1, np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-14)
    assert bessel_j_over_x(2, np.array([0.0]))[0] == 0.0


def test_zeros_interleave_and_increase():
    for m in range(9):
        zs = [bessel_zero(m, q) for q in range(1, 9)]
        assert all(a < b for a, b in zip(zs, zs[1:]))
        if m < 8:
            zs_next = [bessel_zero(m + 1, q) for q in range(1, 9)]
            # classical interlacing: j_{m,q} < j_{m+1,q} < j_{m,q+1}
            assert all(a < b < c for a, b, c in zip(zs, zs_next, zs[1:]))


def test_vectorized_matches_scalar():
    xs = np.linspace(0.0, 25.0, 57)
    vec = bessel_j(3, xs)
    assert vec.shape == xs.shape
    for i, x in enumerate(xs):
        # array and scalar paths may differ in the last ulp
        assert vec[i] == pytest.approx(bessel_j(3, float(x)), rel=1e-14, abs=1e-300)


def test_derivative_matches_finite_difference():
    h = 1e-6
    for m in range(7):
        for x in (0.7, 3.3, 11.2):
            fd = (bessel_j(m, x + h) - bessel_j(m, x - h)) / (2 * h)
            assert bessel_j_derivative(m, x) == pytest.approx(fd, abs=5e-9)


def test_unsupported_order():
    with pytest.raises(UnsupportedOrderError):
        bessel_j(17, 1.0)
    with pytest.raises(UnsupportedOrderError):
        bessel_zero(17, 1)


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(min_value=1, max_value=8),
    x=st.floats(min_value=0.1, max_value=30.0, allow_nan=False),
)
def test_three_term_recurrence(m, x):
    # J_{m-1}(x) + J_{m+1}(x) = (2m/x) J_m(x)
    lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x)
    rhs = 2.0 * m / x * bessel_j(m, x)
    assert lhs == pytest.approx(rhs, abs=1e-11)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(min_value=0.0, max_value=6.0, allow_nan=False))
def test_sum_of_squares_identity(x):
    # J_0^2 + 2 sum_{m>=1} J_m^2 = 1; the m > 16 tail is < 1e-13 for x <= 6
    total = bessel_j(0, x) ** 2 + 2.0 * sum(bessel_j(m, x) ** 2 for m in range(1, 17))
    assert total == pytest.approx(1.0, abs=1e-12)
