import math

import numpy as np
import pytest

import bdcert as b
from bdcert.mc import _destination_sampler


def frozen_model():
    zero = b.Constant(0.0)
    return b.IntensityModel(
        birth=b.RateFamily(zero, b.SharedRule()),
        death=b.RateFamily(zero, b.SharedRule()),
        exodus=b.RateFamily(zero, b.SharedRule()),
        bulk=b.RateFamily(zero, b.GeometricCoefRule(0.5)),
        period=0.0)


def pure_death_model():
    return b.IntensityModel(
        birth=b.RateFamily(b.Constant(0.0), b.SharedRule()),
        death=b.RateFamily(b.Constant(1.0), b.SharedRule()),
        exodus=b.RateFamily(b.Constant(0.0), b.SharedRule()),
        bulk=b.RateFamily(b.Constant(0.0), b.GeometricCoefRule(0.5)),
        period=0.0)


def test_zero_rates_frozen_path():
    cfg = b.SimConfig(paths=500, horizon=4.0, seed=3, majorant=1.0)
    res = b.simulate(frozen_model(), cfg, k=3, observe_times=[1.0, 4.0], S=2)
    for st in res.stats:
        assert st.mean == 3.0
        assert st.mean_err == 0.0
        assert st.p0 == 0.0
        assert st.head == 0.0  # X = 3 > S = 2


def test_pure_death_exponential_law():
    # from k = 1 the empty probability is 1 - exp(-t)
    cfg = b.SimConfig(paths=100000, horizon=1.5, seed=12345)
    res = b.simulate(pure_death_model(), cfg, k=1,
                     observe_times=[0.3, 0.8, 1.5], S=0)
    for st in res.stats:
        exact = 1.0 - math.exp(-st.t)
        assert abs(st.p0 - exact) <= 3.0 * st.p0_err


def test_seed_determinism_and_chunk_invariance(example1):
    m = example1.model
    kw = dict(paths=1500, horizon=2.0, seed=99, majorant=10.5)
    r1 = b.simulate(m, b.SimConfig(**kw), 0, [1.0, 2.0], S=3)
    r2 = b.simulate(m, b.SimConfig(**kw), 0, [1.0, 2.0], S=3)
    r3 = b.simulate(m, b.SimConfig(**kw, workers=3), 0, [1.0, 2.0], S=3)
    for a, c in zip(r1.stats, r2.stats):
        assert a == c
    for a, c in zip(r1.stats, r3.stats):
        assert a == c
    r4 = b.simulate(m, b.SimConfig(paths=1500, horizon=2.0, seed=100,
                                   majorant=10.5), 0, [1.0, 2.0], S=3)
    assert any(a != c for a, c in zip(r1.stats, r4.stats))


def test_majorant_validation(example1):
    cfg = b.SimConfig(paths=10, horizon=1.0, seed=1, majorant=2.0)
    with pytest.raises(b.SimulationError):
        b.simulate(example1.model, cfg, 0, [0.5], S=3)


def test_bad_observation_times(example1):
    cfg = b.SimConfig(paths=10, horizon=1.0, seed=1)
    with pytest.raises(b.SimulationError):
        b.simulate(example1.model, cfg, 0, [2.0], S=3)
    with pytest.raises(b.SimulationError):
        b.simulate(example1.model, cfg, 0, [], S=3)


def test_destination_sampler_geometric(example1):
    sample = _destination_sampler(example1.model)
    rng = np.random.default_rng(7)
    draws = np.array([sample(rng) for _ in range(40000)])
    # law is proportional to 4^-n: P(1) = 3/4, P(2) = 3/16
    p1 = np.mean(draws == 1)
    p2 = np.mean(draws == 2)
    assert p1 == pytest.approx(0.75, abs=0.01)
    assert p2 == pytest.approx(0.1875, abs=0.01)


def test_destination_sampler_power(example2):
    sample = _destination_sampler(example2.model)
    rng = np.random.default_rng(8)
    draws = np.array([sample(rng) for _ in range(20000)])
    total = math.fsum(n ** -10.0 for n in range(1, 100))
    assert np.mean(draws == 1) == pytest.approx(1.0 / total, abs=0.01)


def test_default_majorant_uses_diagonal_bound(example1):
    cfg = b.SimConfig(paths=5, horizon=0.5, seed=2)
    res = b.simulate(example1.model, cfg, 0, [0.5], S=3)
    assert res.majorant == pytest.approx(24.0)  # 2 L with declared L = 12
