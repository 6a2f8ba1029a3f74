"""Special functions against extended-precision reference values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaging.specfun import EULER_GAMMA, bessel_j0, exp_e1_scaled, exp_integral_e1

# mpmath at 40 digits: besselj(0, x)
J0_REF = [
    (0.0, 1.0),
    (0.5, 0.93846980724081290423),
    (1.0, 0.76519768655796655145),
    (5.0, -0.17759677131433830435),
    (8.0, 0.17165080713755390609),
    (11.9, 0.02504944169958964508),
    (12.0, 0.047689310796833536624),
    (12.5, 0.14688405470042110231),
    (20.0, 0.16702466434058315473),
    (30.0, -0.086367983581040211336),
    (49.9, 0.045788625467906904725),
]

# mpmath at 40 digits: (x, e1(x), exp(x) * e1(x))
E1_REF = [
    (1e-6, 13.238295893062491289, 13.238309131365003501),
    (1e-3, 6.3315393641361493112, 6.3378740703254879563),
    (0.1, 1.8229239584193906159, 2.0146425447084516348),
    (0.5, 0.55977359477616081175, 0.92291063248373046883),
    (1.0, 0.21938393439552027368, 0.59634736232319407434),
    (1.5, 0.1000195824066326519, 0.44825666929158295392),
    (2.0, 0.048900510708061119567, 0.3613286168882225847),
    (5.0, 0.0011482955912753257973, 0.17042217628473220181),
    (10.0, 4.1569689296853242774e-6, 0.091563333939788081876),
    (50.0, 3.7832640295504590187e-24, 0.019615109930114870365),
    (100.0, 3.6835977616820321802e-46, 0.0099019422867330184064),
    (300.0, 1.7103842768045101157e-133, 0.0033222955652707070644),
    (700.0, 1.4065187662340329228e-307, 0.0014265364183008866918),
]


def test_euler_constant():
    assert EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-16)


@pytest.mark.parametrize("x, ref", J0_REF)
def test_j0_reference(x, ref):
    tol = 1e-10 if x <= 12 else 1e-8
    assert abs(bessel_j0(x) - ref) <= tol


def test_j0_first_zero():
    assert abs(bessel_j0(2.404825557695773)) <= 1e-9


def test_j0_even_and_vectorized():
    x = np.linspace(0.0, 40.0, 101)
    np.testing.assert_array_equal(bessel_j0(-x), bessel_j0(x))
    assert bessel_j0(x).shape == x.shape
    assert np.ndim(bessel_j0(3.0)) == 0


def test_j0_range_on_grid():
    v = bessel_j0(np.linspace(0.0, 200.0, 20001))
    assert v.min() >= -0.4028 and v.max() <= 1.0


def test_j0_rejects_nan():
    with pytest.raises(ValueError):
        bessel_j0(np.nan)


@pytest.mark.parametrize("x, e1, scaled", E1_REF)
def test_e1_reference(x, e1, scaled):
    assert exp_integral_e1(x) == pytest.approx(e1, rel=1e-10)
    assert exp_e1_scaled(x) == pytest.approx(scaled, rel=1e-10)


def test_e1_series_form_at_one():
    # truncated textbook series, independent of the implementation
    s = sum((-1) ** (k + 1) / (k * math.factorial(k)) for k in range(1, 30))
    assert exp_integral_e1(1.0) == pytest.approx(-EULER_GAMMA + s, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_e1_domain(x):
    with pytest.raises(ValueError):
        exp_integral_e1(x)
    with pytest.raises(ValueError):
        exp_e1_scaled(x)


def test_e1_tail():
    assert exp_integral_e1(800.0) == 0.0
    assert exp_e1_scaled(np.inf) == 0.0
    x = np.logspace(-3, 2.8, 400)
    assert np.all(np.diff(exp_integral_e1(x)) < 0)


def test_scaled_matches_product():
    x = np.linspace(0.01, 100.0, 5000)
    prod = np.exp(x) * exp_integral_e1(x)
    scaled = exp_e1_scaled(x)
    assert np.max(np.abs(scaled - prod) / scaled) <= 1e-9


def test_scaled_large_arguments():
    # mpmath references
    assert exp_e1_scaled(1e3) == pytest.approx(0.000999001994023880715, rel=1e-12)
    assert exp_e1_scaled(1e6) == pytest.approx(9.99999000001999994e-7, rel=1e-12)
    assert exp_e1_scaled(1e12) == pytest.approx(9.99999999999e-13, rel=1e-12)


def test_bracket_on_grid():
    x = np.logspace(-6, 12, 4000)
    v = exp_e1_scaled(x)
    assert np.all(v > 1.0 / (x + 1.0))
    assert np.all(v < 1.0 / x)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-8, max_value=1e12))
def test_bracket_property(x):
    v = exp_e1_scaled(x)
    assert 1.0 / (x + 1.0) < v < 1.0 / x


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=700.0))
def test_scaled_decreasing(x):
    # d/dx [e^x E1(x)] = e^x E1(x) - 1/x < 0 : scaled form decreases
    h = 1e-3 * x
    assert exp_e1_scaled(x + h) < exp_e1_scaled(x)
