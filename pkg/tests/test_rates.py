import math

import numpy as np
import pytest

import bdcert as b
from bdcert import rates


def test_constant_eval():
    assert rates.Constant(2.0)(17.3) == 2.0


def test_example1_rates_at_quarter_period():
    lam = b.Sinusoid(1.0, 1.0, 0.0)   # 1 + sin(2 pi t)
    mu = b.Sinusoid(1.0, -1.0, 0.0)   # 1 - sin(2 pi t)
    assert lam(0.25) == pytest.approx(2.0, abs=1e-14)
    assert mu(0.25) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("c0,c1,c2,a,t", [
    (2.0, 0.0, 1.0, 0.0, 1.7),
    (1.0, 1.0, 0.0, 0.3, 2.9),
    (0.5, -0.2, 0.4, 1.1, 1.1),
])
def test_sinusoid_integral_against_quadrature(c0, c1, c2, a, t):
    f = b.Sinusoid(c0, c1, c2)
    xs = np.linspace(a, t, 200001)
    oracle = np.trapezoid(f(xs), xs)
    assert f.integral(a, t) == pytest.approx(oracle, abs=1e-9)


def test_sinusoid_extremes_match_grid():
    f = b.Sinusoid(2.0, 0.7, -1.1)
    xs = np.linspace(0, 1, 200001)
    vals = f(xs)
    assert f.sup() == pytest.approx(vals.max(), abs=1e-8)
    assert f.inf() == pytest.approx(vals.min(), abs=1e-8)
    assert f.period_mean() == pytest.approx(vals[:-1].mean(), abs=1e-6)


def test_tabulated_interpolation_and_wrap():
    tab = b.Tabulated((0.0, 1.0, 0.0, 1.0), period=1.0)
    assert tab(0.125) == pytest.approx(0.5)
    assert tab(1.125) == pytest.approx(0.5)   # periodic wrap
    assert tab(0.875) == pytest.approx(0.5)   # wraps to values[0]
    assert tab.sup() == 1.0 and tab.inf() == 0.0


def test_tabulated_integral_is_exact_for_interpolant():
    rng = np.random.default_rng(3)
    vals = rng.uniform(0, 2, size=16)
    tab = b.Tabulated(tuple(vals), period=1.0)
    xs = np.linspace(0, 2.37, 400001)
    oracle = np.trapezoid(tab(xs), xs)
    assert tab.integral(0.0, 2.37) == pytest.approx(oracle, abs=1e-7)


def test_expression_function():
    f = b.Expression("2 + cos(2*pi*t)", period=1.0)
    assert f(0.0) == pytest.approx(3.0)
    assert f.period_mean() == pytest.approx(2.0, abs=1e-6)


def test_combine_stays_closed_form():
    f = rates.combine([(2.0, b.Sinusoid(1.0, 1.0, 0.0)),
                       (3.0, b.Constant(0.5))], const=1.0)
    assert isinstance(f, b.Sinusoid)
    assert f.c0 == pytest.approx(4.5)
    assert f.c1 == pytest.approx(2.0)


def test_negative_rate_rejected():
    with pytest.raises(b.ModelValidationError):
        rates.require_nonnegative(b.Sinusoid(0.5, 1.0, 0.0), "test rate")
