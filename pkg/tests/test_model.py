import math

import numpy as np
import pytest

import bdcert as b
from bdcert.model import geometric_tail, power_tail

from conftest import random_model


def zero_model():
    zero = b.Constant(0.0)
    return b.IntensityModel(
        birth=b.RateFamily(zero, b.SharedRule()),
        death=b.RateFamily(zero, b.SharedRule()),
        exodus=b.RateFamily(zero, b.SharedRule()),
        bulk=b.RateFamily(zero, b.GeometricCoefRule(0.5)),
        period=0.0, name="zero")


def test_build_generator_example1_column1(example1):
    # direct substitution at t = 0: lam = 1, mu_1 = 1, beta_1 = 2 + 1 + 1 = 4
    sl = b.build_generator(example1.model, 3, 0.0, "plain")
    A = sl.to_dense()
    assert A[1, 1] == pytest.approx(-6.0, abs=1e-12)
    assert A[0, 1] == pytest.approx(5.0, abs=1e-12)
    assert A[2, 1] == pytest.approx(1.0, abs=1e-12)


def test_zero_model_gives_zero_matrix():
    sl = b.build_generator(zero_model(), 4, 2.3, "plain")
    assert np.abs(sl.to_dense()).max() == 0.0


def test_column0_diagonal_full_geometric_series(example1):
    # sum over n of (1+sin 0)/4^n = 1/3
    sl = b.build_generator(example1.model, 3, 0.0, "plain")
    assert sl.to_dense()[0, 0] == pytest.approx(-1.0 / 3.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_column_sum_structure(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    N = int(rng.integers(3, 25))
    for t in rng.uniform(0, 2, size=3):
        plain = b.build_generator(m, N, float(t), "plain")
        sums = plain.column_sums()
        lam_N = m.birth.value(N, float(t))
        tail = m.bulk.rule.coef_tail(N) * m.bulk.base(float(t))
        assert np.allclose(sums[1:N], 0.0, atol=1e-12)
        assert sums[N] == pytest.approx(-lam_N, abs=1e-12)
        assert sums[0] == pytest.approx(-tail, abs=1e-12)
        shifted = b.build_generator(m, N, float(t), "shifted")
        bstar = b.catastrophe_floor(m, float(t))
        assert np.allclose(shifted.column_sums() - sums, -bstar, atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_plain_offdiagonals_nonnegative(seed):
    rng = np.random.default_rng(100 + seed)
    m = random_model(rng)
    for t in rng.uniform(0, 1, size=3):
        A = b.build_generator(m, 12, float(t), "plain").to_dense()
        off = A - np.diag(np.diag(A))
        assert off.min() >= -1e-15


def test_slices_are_periodic(example1):
    m = example1.model
    for t in (0.13, 0.5, 0.77):
        a = b.build_generator(m, 8, t, "shifted").to_dense()
        c = b.build_generator(m, 8, t + 1.0, "shifted").to_dense()
        assert np.abs(a - c).max() <= 1e-12


def test_diagonal_bound_example1(example1):
    m = example1.model
    computed = b.diagonal_bound(
        b.IntensityModel(birth=m.birth, death=m.death, exodus=m.exodus,
                         bulk=m.bulk, period=1.0, name="undeclared"))
    assert computed <= 12.0
    assert m.L_bound() == 12.0  # declared value wins when larger


def test_diagonal_bound_zero_and_example3(example3):
    assert zero_model().L_bound() == 0.0
    assert example3.model.L_bound() == 74.0


def test_diagonal_bound_brute_force(example3):
    # sampled maximum of |a_ii(t)| over states and times never exceeds it
    m = example3.model
    ts = np.linspace(0, 1, 257)
    peak = 0.0
    ns = np.arange(1, 200)
    for t in ts:
        tot = (m.birth.values(ns, float(t)) + m.death.values(ns, float(t))
               + m.exodus.values(ns, float(t)))
        peak = max(peak, tot.max(), m.bulk.series_sum(float(t)))
    assert peak <= m.L_bound() + 1e-9


def test_power_tail_against_brute_sum():
    oracle = math.fsum(n ** -10.0 for n in range(56, 300000))
    got = power_tail(10.0, 56)
    assert got >= oracle
    assert got == pytest.approx(oracle, rel=1e-12)


def test_geometric_tail_closed_form():
    oracle = math.fsum(0.25 ** n for n in range(3, 200))
    assert geometric_tail(0.25, 3) == pytest.approx(oracle, rel=1e-14)


@pytest.mark.parametrize("w,rule", [
    (b.GeometricWeights(2.0), b.GeometricCoefRule(0.25)),
    (b.GeometricThenLinearWeights(1.5, 20), b.GeometricCoefRule(0.25)),
    (b.GeometricThenLinearWeights(1.5, 20), b.PowerCoefRule(10.0)),
    (b.ExplicitWeights((1.0, 2.0, 4.0), tail="linear"), b.PowerCoefRule(6.0)),
    (b.ExplicitWeights((1.0, 2.0, 2.0), tail="constant"),
     b.GeometricCoefRule(0.4)),
])
def test_weighted_coefficient_sums_against_brute_force(w, rule):
    # term-wise float products stay finite up to n = 900 and the omitted
    # tails are far below the comparison tolerance
    oracle = math.fsum(float(w.d(n)) * float(rule.mult(np.asarray([n]))[0])
                       for n in range(1, 900))
    assert rule.weighted_coef_sum(w) == pytest.approx(oracle, rel=1e-9)


def test_weighted_series_divergence_errors():
    with pytest.raises(b.SeriesDivergenceError):
        b.PowerCoefRule(10.0).weighted_coef_sum(b.GeometricWeights(1.5))
    with pytest.raises(b.SeriesDivergenceError):
        b.GeometricCoefRule(0.5).weighted_coef_sum(b.GeometricWeights(2.0))


def test_index_series():
    oracle = math.fsum(n * 0.25 ** n for n in range(1, 200))
    assert b.GeometricCoefRule(0.25).index_coef_sum() == pytest.approx(
        oracle, rel=1e-12)
    with pytest.raises(b.SeriesDivergenceError):
        b.PowerCoefRule(1.5).index_coef_sum()


def test_model_validation_errors(example1):
    m = example1.model
    with pytest.raises(b.ModelValidationError):
        b.IntensityModel(birth=m.birth, death=m.death, exodus=m.exodus,
                         bulk=b.RateFamily(b.Constant(1.0), b.SharedRule()),
                         period=1.0)
    with pytest.raises(b.ModelValidationError):
        b.IntensityModel(
            birth=b.RateFamily(b.Sinusoid(0.5, 1.0, 0.0), b.SharedRule()),
            death=m.death, exodus=m.exodus, bulk=m.bulk, period=1.0)
    with pytest.raises(b.ModelValidationError):
        b.IntensityModel(
            birth=b.RateFamily(b.Sinusoid(1.0, 1.0, 0.0, period=0.5),
                               b.SharedRule()),
            death=m.death, exodus=m.exodus, bulk=m.bulk, period=1.0)
