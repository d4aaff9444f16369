import math

import numpy as np
import pytest

import bdcert as b
from bdcert.model import apply_generator, rate_arrays

from conftest import random_model


def expm_taylor(A: np.ndarray, tol=1e-12) -> np.ndarray:
    """Scaling-and-squaring Taylor matrix exponential, the oracle for the
    piecewise-constant comparison."""
    n = A.shape[0]
    norm = np.abs(A).sum(axis=0).max()
    s = max(0, int(math.ceil(math.log2(max(norm, 1e-30)))) + 1)
    B = A / 2 ** s
    out = np.eye(n)
    term = np.eye(n)
    k = 1
    while True:
        term = term @ B / k
        out += term
        if np.abs(term).max() < tol:
            break
        k += 1
    for _ in range(s):
        out = out @ out
    return out


def constant_model(lam, mu, beta, r_scale=0.0, ratio=0.5, servers=2):
    return b.IntensityModel(
        birth=b.RateFamily(b.Constant(lam), b.SharedRule()),
        death=b.RateFamily(b.Constant(mu), b.CappedLinearRule(servers)),
        exodus=b.RateFamily(b.Constant(beta), b.SharedRule()),
        bulk=b.RateFamily(b.Constant(r_scale), b.GeometricCoefRule(ratio)),
        period=0.0)


def test_zero_rates_frozen_state():
    m = constant_model(0.0, 0.0, 0.0)
    y0 = b.delta_vector(6, 2)
    traj = b.integrate(m, 6, y0, 0.0, 3.0, step=0.01)
    assert np.abs(traj.states - y0).max() == 0.0


def test_constant_rates_reach_stationary_vector():
    # oracle: solve A* x = -g directly for the constant system
    m = constant_model(0.8, 1.2, 0.6, r_scale=0.4)
    N = 12
    sl = b.build_generator(m, N, 0.0, "shifted")
    A = sl.to_dense()
    g = np.zeros(N + 1)
    g[0] = sl.beta_floor
    x = np.linalg.solve(A, -g)
    traj = b.integrate(m, N, b.delta_vector(N, 0), 0.0, 30.0, step=0.01)
    final = traj.at(30.0)
    assert np.abs(final - x).max() < 1e-9
    residual = sl.apply(final)
    residual[0] += sl.beta_floor
    assert np.abs(residual).max() < 1e-9


def test_plain_and_shifted_formulations_agree(example1):
    m = example1.model
    y0 = b.delta_vector(100, 0)
    a = b.integrate(m, 100, y0, 0.0, 1.0, variant="plain")
    c = b.solve_full_system(m, 100, y0, 0.0, 1.0, variant="shifted")
    assert np.abs(a.states - c.states).max() <= 1e-10


def test_point_mass_initial_condition(example1):
    traj = b.integrate(example1.model, 10, b.delta_vector(10, 0), 0.0, 0.5)
    assert traj.at(0.0)[0] == 1.0


def test_refinement_within_certificate(example1):
    m = example1.model
    inputs = b.certificate_inputs(m, example1.weights)
    cert = b.make_certificate(inputs, 100, 0, (10.0, 10.0))
    coarse = b.integrate(m, 100, b.delta_vector(100, 0), 0.0, 10.0)
    fine = b.integrate(m, 200, b.delta_vector(200, 0), 0.0, 10.0)
    diff = np.abs(np.pad(coarse.at(10.0), (0, 100)) - fine.at(10.0)).sum()
    assert diff <= cert.tv_bound(10.0)


def test_rk4_matches_interval_exponential_products():
    # piecewise-constant rates: exact flow is a product of affine-augmented
    # matrix exponentials over the constant intervals
    rng = np.random.default_rng(42)
    N = 5
    pieces = []
    for _ in range(3):
        lam, mu, beta = rng.uniform(0.2, 1.5, size=3)
        pieces.append(constant_model(lam, mu, beta, r_scale=rng.uniform(0, 0.5)))
    y = b.delta_vector(N, 2)
    y_ode = y.copy()
    h = 0.4
    for m in pieces:
        sl = b.build_generator(m, N, 0.0, "shifted")
        A = sl.to_dense()
        aug = np.zeros((N + 2, N + 2))
        aug[:N + 1, :N + 1] = A * h
        aug[0, N + 1] = sl.beta_floor * h
        E = expm_taylor(aug)
        y = E[:N + 1, :N + 1] @ y + E[:N + 1, N + 1]
        traj = b.integrate(m, N, y_ode, 0.0, h, step=5e-4, output_dt=h)
        y_ode = traj.at(h)
        assert np.abs(y - y_ode).max() < 1e-8


def test_mass_flow_identity(example1):
    # d/dt sum(y) = floor*(1 - sum y) - lam_N y_N - tail(t) y_0; checked by
    # per-step finite differences against the trapezoid of the right side
    m = example1.model
    N = 5
    step = 0.002
    traj = b.integrate(m, N, b.delta_vector(N, 0), 0.0, 2.0, step=step,
                       output_dt=step)
    tail_coef = m.bulk.rule.coef_tail(N)
    floor = m.beta_floor_fn()

    def rhs(i):
        t = float(traj.times[i])
        y = traj.states[i]
        return (floor(t) * (1.0 - y.sum())
                - m.birth.value(N, t) * y[N]
                - tail_coef * m.bulk.base(t) * y[0])

    sums = traj.states.sum(axis=1)
    for i in range(len(sums) - 1):
        inc = sums[i + 1] - sums[i]
        quad = 0.5 * step * (rhs(i) + rhs(i + 1))
        assert abs(inc - quad) <= 1e-6 * step


def test_step_halving_is_fourth_order(example1):
    m = example1.model
    y0 = b.delta_vector(20, 0)
    est = {}
    for h in (0.016, 0.008):
        traj = b.integrate(m, 20, y0, 0.0, 1.0, step=h, output_dt=0.5,
                           error_estimate=True)
        est[h] = traj.error_estimate
    ratio = est[0.016] / est[0.008]
    assert 8.0 <= ratio <= 32.0


def test_stability_refusal(example1):
    with pytest.raises(b.IntegrationError):
        b.integrate(example1.model, 10, b.delta_vector(10, 0), 0.0, 1.0,
                    step=0.05)  # 0.05 * 2 * 12 = 1.2 > 0.5


def test_output_clamps_negatives_only_at_access(example1):
    traj = b.integrate(example1.model, 30, b.delta_vector(30, 0), 0.0, 2.0)
    raw = traj.at(2.0)
    clamped = traj.probabilities(2.0)
    assert clamped.min() >= 0.0
    assert np.all(clamped >= raw)


def test_mean_of():
    assert b.mean_of(b.delta_vector(9, 0)) == 0.0
    assert b.mean_of(b.delta_vector(9, 5)) == 5.0
    assert b.mean_of(np.full(5, 0.2)) == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(3))
def test_empirical_contraction_random_models(seed):
    rng = np.random.default_rng(800 + seed)
    m = random_model(rng)
    env = b.decay_envelope(m.beta_floor_fn())
    N = 20
    y0 = rng.uniform(0, 1, size=N + 1)
    y0 /= y0.sum()
    ta = b.integrate(m, N, y0, 0.0, 3.0)
    tb = b.integrate(m, N, b.delta_vector(N, 3), 0.0, 3.0)
    scale = np.abs(y0 - b.delta_vector(N, 3)).sum() / 2.0
    for t in (0.5, 1.0, 2.0, 3.0):
        diff = np.abs(ta.at(t) - tb.at(t)).sum()
        assert diff <= scale * b.ergodicity_bound(env, t).exact + 1e-9


def test_mean_difference_bound(example1):
    # |E(t,5) - E(t,0)| <= (1 + d_5)/W * exp(-int of the weighted rate)
    p = example1
    inputs = b.certificate_inputs(p.model, p.weights)
    N = 60
    ta = b.integrate(p.model, N, b.delta_vector(N, 0), 0.0, 8.0)
    tb = b.integrate(p.model, N, b.delta_vector(N, 5), 0.0, 8.0)
    for t in np.arange(0.5, 8.01, 0.5):
        gap = abs(b.mean_of(ta.at(float(t))) - b.mean_of(tb.at(float(t))))
        cap = b.mean_convergence_bound(p.weights, inputs.weighted_envelope,
                                       5, float(t))
        assert gap <= cap.exact
        assert cap.exact <= cap.envelope + 1e-12


def test_weighted_solution_and_component_bounds(example1):
    # the weighted norm of the truncated solution obeys
    # M1 exp(-a1 t) d_k + M1 theta/a1, and the top component is that over d_N
    p = example1
    inputs = b.certificate_inputs(p.model, p.weights)
    N = 30
    traj = b.integrate(p.model, N, b.delta_vector(N, 0), 0.0, 5.0)
    d = p.weights.d(np.arange(N + 1))
    for t in np.arange(0.0, 5.01, 0.25):
        wn = float(np.abs(traj.at(float(t))) @ d)
        cap = (inputs.M1 * math.exp(-inputs.a1 * t) * 1.0
               + inputs.M1 * inputs.theta / inputs.a1)
        assert wn <= cap + 1e-9
        assert traj.at(float(t))[N] <= cap / d[N] + 1e-12


def test_tail_mean_inequality(example1):
    # sum_i i*y_{N+i} <= ||y||_{1D} * sup_i i/d_{N+i} for the refined run
    p = example1
    N, N4 = 10, 40
    traj = b.integrate(p.model, N4, b.delta_vector(N4, 0), 0.0, 3.0)
    w = p.weights
    d4 = w.d(np.arange(N4 + 1))
    sup = w.tail_index_sup(N)
    for t in (1.0, 2.0, 3.0):
        y = traj.probabilities(t)
        lhs = float(np.arange(1, N4 - N + 1) @ y[N + 1:])
        rhs = float(np.abs(y) @ d4) * sup
        assert lhs <= rhs + 1e-12


def test_limiting_regime_constant_model():
    m = constant_model(0.5, 1.0, 0.8, r_scale=0.3)
    regime = b.limiting_regime(m, b.GeometricWeights(1.5), 1e-4, S=1)
    assert np.ptp(regime.p0) < 1e-6
    assert np.ptp(regime.mean) < 1e-6
    assert regime.periodicity_defect <= regime.defect_allowance


def test_limiting_regime_example1(example1):
    regime = b.limiting_regime(example1.model, example1.weights, 1e-5, S=3)
    assert regime.certificate.N <= 30
    assert 10.0 <= regime.t_star <= 14.0
    assert regime.periodicity_defect <= regime.defect_allowance
    assert regime.times[0] == pytest.approx(regime.t_star)
    assert regime.times[-1] == pytest.approx(regime.t_star + 1.0)
    # characteristics are probabilities / a nonnegative mean
    assert np.all(regime.p0 >= 0) and np.all(regime.p0 <= 1 + 1e-12)
    assert np.all(regime.head_mass <= 1 + 1e-12)
    assert np.all(regime.mean >= 0)


@pytest.mark.slow
def test_limiting_regime_example3(example3):
    regime = b.limiting_regime(example3.model, example3.weights, 1e-5, S=20)
    assert regime.certificate.N <= 220
    assert 40.0 <= regime.t_star <= 70.0
    assert regime.periodicity_defect <= regime.defect_allowance
