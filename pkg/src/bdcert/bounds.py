"""Contraction machinery: logarithmic norms, catastrophe-rate floors,
weighted column gaps, certified decay envelopes and the ergodicity bounds
they imply.

The central facts used here: the l1 logarithmic norm of a matrix is the
largest column sum with off-diagonal entries taken in absolute value; for
the shifted operator every interior column sums to exactly minus the
catastrophe-rate floor; and re-weighting states by a nondecreasing sequence
d_n turns the same computation into a strictly stronger contraction rate
whenever the weighted bulk-arrival series converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rates
from .errors import CertificationError, EssentialRateError
from .model import AdditiveDecayRule, GeneratorSlice, IntensityModel
from .weights import (ExplicitWeights, GeometricThenLinearWeights,
                      GeometricWeights, ONES)


def log_norm(B: GeneratorSlice) -> float:
    """l1 logarithmic norm of a finite slice: max over columns j of
    (diagonal + sum of |off-diagonal| column entries)."""
    N = B.N
    diag = B.diagonal()
    vals = np.empty(N + 1)
    vals[0] = diag[0] + float(np.abs(B.r[1:]).sum())
    row0 = np.abs(B.row0_entries())
    for j in range(1, N + 1):
        v = diag[j] + row0[j - 1]
        if j >= 2:
            v += abs(B.mu[j])
        if j <= N - 1:
            v += abs(B.lam[j])
        vals[j] = v
    return float(vals.max())


def catastrophe_floor(model: IntensityModel, t):
    """Pointwise infimum over states of the catastrophe rates; for the
    supported monotone families this is exact (the n -> inf limit or the
    n = 1 value), never a finite probe."""
    return model.beta_floor_fn()(t)


def catastrophe_floor_fn(model: IntensityModel):
    return model.beta_floor_fn()


# ---------------------------------------------------------------------------
# weighted column gaps


def _column_gap_parts(model: IntensityModel, weights, t, i_max: int):
    """Column gaps |a*_ii| - sum_j (d_j/d_i)|a*_ji| of the shifted operator.

    Returns (gap0, gaps, limit) where gap0 has the weighted bulk series,
    gaps stacks columns 1..i_max and limit is the i -> inf gap.  ``t`` may be
    an array; gaps then has shape (i_max, len(t)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    bstar = np.asarray(model.beta_floor_fn()(t), dtype=float)

    lam_b = np.asarray(model.birth.base(t), dtype=float)
    mu_b = np.asarray(model.death.base(t), dtype=float)
    bet_b = np.asarray(model.exodus.base(t), dtype=float)
    r_b = np.asarray(model.bulk.base(t), dtype=float)

    ns = np.arange(1, i_max + 1)
    lam = np.outer(model.birth.rule.mult(ns), lam_b) \
        + model.birth.rule.add(ns)[:, None]
    mu = np.outer(model.death.rule.mult(ns), mu_b) \
        + model.death.rule.add(ns)[:, None]
    bet = np.outer(model.exodus.rule.mult(ns), bet_b) \
        + model.exodus.rule.add(ns)[:, None]

    d = weights.d(np.arange(i_max + 2)).astype(float)
    up = (d[2:i_max + 2] / d[1:i_max + 1])[:, None]      # d_{i+1}/d_i
    down = (d[0:i_max] / d[1:i_max + 1])[:, None]        # d_{i-1}/d_i
    inv = (1.0 / d[1:i_max + 1])[:, None]                # d_0/d_i

    gaps = lam * (1.0 - up) + bet - inv * (bet - bstar[None, :])
    gaps[1:] += mu[1:] * (1.0 - down[1:])
    # column 1 merges the death rate into the row-0 entry
    gaps[0] += mu[0] - inv[0] * mu[0]

    if model.bulk.base.sup() == 0.0:
        gap0 = bstar.copy()
    else:
        rsum = model.bulk.rule.coef_sum() * r_b
        wsum = model.bulk.rule.weighted_coef_sum(weights) * r_b
        gap0 = rsum + bstar - wsum

    rho_up, rho_down, inv_lim = weights.ratio_limits()
    lam_lim = model.birth.limit(t)
    mu_lim = model.death.limit(t)
    bet_lim = model.exodus.limit(t)
    limit = (lam_lim * (1.0 - rho_up) + mu_lim * (1.0 - rho_down)
             + bet_lim - inv_lim * (bet_lim - bstar))
    return gap0, gaps, np.asarray(limit, dtype=float)


def _probe_depth(model: IntensityModel, weights, i_max: int | None) -> int:
    need = max(model.birth.rule.breakpoint(), model.death.rule.breakpoint(),
               model.exodus.rule.breakpoint())
    switch = getattr(weights, "switch", 0)
    vals = getattr(weights, "values", ())
    depth = max(need + 64, switch + 64, len(vals) + 64, 256)
    if i_max is not None:
        if i_max < 2:
            raise CertificationError("i_max must be >= 2")
        depth = max(depth, i_max)
    return depth


def _ratio_deviations(weights, depth: int):
    """Bounds on how far the weight ratios past the probe differ from their
    limits: (dev_up, dev_down, dev_inv, k_up, k_dn) with
    dev_up >= sup_{i>depth} |rho_up - d_{i+1}/d_i| and k_up >=
    sup_{i>depth} |1 - d_{i+1}/d_i| (similarly down / 1/d_i)."""
    if isinstance(weights, GeometricWeights):
        b = weights.base
        dev_inv = 0.0 if b == 1.0 else b ** (-(depth + 1))
        return 0.0, 0.0, dev_inv, abs(1.0 - b), abs(1.0 - 1.0 / b)
    if isinstance(weights, GeometricThenLinearWeights):
        if depth < weights.switch:
            raise CertificationError("probe depth below the weight switch")
        e = 1.0 / (depth + 1)
        dev_inv = weights.switch / (weights.base ** weights.switch * (depth + 2))
        return e, e, dev_inv, e, e
    if isinstance(weights, ExplicitWeights):
        if depth < len(weights.values):
            raise CertificationError("probe depth below the explicit prefix")
        s = weights._slope()
        if s == 0.0:
            return 0.0, 0.0, 0.0, 0.0, 0.0
        e = s / float(weights.d(depth + 1))
        return e, e, 1.0 / float(weights.d(depth + 1)), e, e
    raise CertificationError(f"unsupported weight rule {type(weights).__name__}")


def _tail_slack(model: IntensityModel, weights, t: np.ndarray,
                depth: int) -> np.ndarray:
    """Certified bound on how far column gaps beyond the probe can dip below
    the analytic limit.  Past every state-rule breakpoint the families are
    value_i = f_inf(t) + c_f/i, so the residual is a ratio deviation times a
    limit rate plus O(1/depth) decay terms."""
    dev_up, dev_dn, dev_inv, k_up, k_dn = _ratio_deviations(weights, depth)

    def coef(rule) -> float:
        return abs(rule.coef) if isinstance(rule, AdditiveDecayRule) else 0.0

    c_lam = coef(model.birth.rule)
    c_mu = coef(model.death.rule)
    c_bet = coef(model.exodus.rule)
    lam_inf = np.asarray(model.birth.limit(t), dtype=float)
    mu_inf = np.asarray(model.death.limit(t), dtype=float)
    bet_inf = np.asarray(model.exodus.limit(t), dtype=float)
    bstar = np.asarray(model.beta_floor_fn()(t), dtype=float)
    slack = (lam_inf * dev_up + mu_inf * dev_dn
             + (c_lam * (1.0 + k_up) + c_mu * (1.0 + k_dn) + 2.0 * c_bet)
             / (depth + 1)
             + dev_inv * np.maximum(bet_inf - bstar, 0.0))
    return slack


def weighted_contraction_rate(model: IntensityModel, weights, t,
                              i_max: int | None = None):
    """Certified infimum over all columns of the weighted gap.

    Columns up to the probe depth are evaluated directly and the analytic
    i -> inf limit is always included.  When the probed tail is monotone the
    infimum is exact; otherwise the limit is lowered by a certified tail
    slack of order 1/depth so unprobed dips can never be missed.  Returns
    (value, stabilized); value follows the shape of t.
    """
    depth = _probe_depth(model, weights, i_max)
    gap0, gaps, limit = _column_gap_parts(model, weights, t, depth)
    diffs = np.diff(gaps[-depth // 4:], axis=0)
    mono = (np.all(diffs >= -1e-12, axis=0) | np.all(diffs <= 1e-12, axis=0))
    stabilized = bool(np.all(mono))
    tail_floor = limit - np.where(mono, 0.0,
                                  _tail_slack(model, weights,
                                              np.atleast_1d(t), depth))
    val = np.minimum(gap0, np.minimum(gaps.min(axis=0), tail_floor))
    if np.ndim(t) == 0:
        return float(val[0]), stabilized
    return val, stabilized


def weighted_contraction_fn(model: IntensityModel, weights,
                            grid: int = 2048, i_max: int | None = None):
    """Tabulate the certified weighted contraction rate over one period."""
    if isinstance(weights, type(ONES)) and weights == ONES:
        return model.beta_floor_fn()
    period = model.period if model.period > 0 else 1.0
    ts = np.arange(grid) * (period / grid)
    vals, _ = weighted_contraction_rate(model, weights, ts, i_max)
    return rates.Tabulated(tuple(vals), period=period, sampled=True)


# ---------------------------------------------------------------------------
# decay envelopes


@dataclass(frozen=True)
class DecayEnvelope:
    """Certified constants: exp(-int_s^t f) <= M * exp(-a (t-s)) for all
    0 <= s <= t.  ``source`` keeps the rate function so exact-integral bound
    forms stay available next to the envelope form."""

    M: float
    a: float
    source: object
    grid: int = 2048

    def value(self, dt: float) -> float:
        return self.M * math.exp(-self.a * dt)

    def exact(self, t0: float, t1: float) -> float:
        return math.exp(-self.source.integral(t0, t1))


def _certify_envelope(f, M: float, a: float, grid: int) -> None:
    period = f.period if f.period > 0 else 1.0
    ts = np.linspace(0.0, 2.0 * period, 2 * grid + 1)
    cum = np.array([f.integral(0.0, x) for x in ts])
    G = a * ts - cum
    spread = float(np.max(G - np.minimum.accumulate(G)))
    if spread > math.log(M) + 1e-12:
        raise CertificationError(
            f"envelope check failed: spread {spread:.12g} exceeds "
            f"log M = {math.log(M):.12g}")


def decay_envelope(f, grid: int = 2048) -> DecayEnvelope:
    """Build the tightest-rate envelope for a periodic rate function: the
    rate is the period mean, the factor absorbs the largest integral deficit
    over a one-period window.  Sinusoid-affine sources get the closed form
    exp(amplitude * period / pi); tabulated sources get a dense-grid maximum
    with a 1e-9 safety inflation.  The result is re-checked pointwise before
    being returned.
    """
    mean = f.period_mean()
    if mean <= 0.0:
        raise EssentialRateError(
            "rate function has nonpositive period mean; the essential-rates "
            "condition fails and no decay envelope exists")
    if isinstance(f, rates.Constant):
        env = DecayEnvelope(M=1.0, a=mean, source=f, grid=grid)
        return env
    if isinstance(f, rates.Sinusoid):
        M = math.exp(f.amplitude() * f.period / math.pi)
        env = DecayEnvelope(M=M, a=mean, source=f, grid=grid)
        _certify_envelope(f, env.M, env.a, min(grid, 512))
        return env
    period = f.period if f.period > 0 else 1.0
    ts = np.linspace(0.0, period, grid + 1)
    cum = np.array([f.integral(0.0, x) for x in ts])
    G = mean * ts - cum
    spread = float(G.max() - G.min())
    M = math.exp(spread + 1e-9)
    env = DecayEnvelope(M=M, a=mean, source=f, grid=grid)
    _certify_envelope(f, env.M, env.a, grid)
    return env


class BoundPair(NamedTuple):
    """A bound in its exact-integral form and its looser envelope form."""

    exact: float
    envelope: float


def ergodicity_bound(env: DecayEnvelope, t: float) -> BoundPair:
    """Total-variation contraction of any two solutions started at time 0:
    2 exp(-int_0^t floor) exactly, and 2 M exp(-a t) via the envelope."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return BoundPair(exact=2.0 * env.exact(0.0, t),
                     envelope=2.0 * env.M * math.exp(-env.a * t))


def weighted_ergodicity_bound(env1: DecayEnvelope, p0_norm: float,
                              t: float) -> BoundPair:
    """Weighted-norm contraction seeded with the initial weighted distance."""
    return BoundPair(exact=env1.exact(0.0, t) * p0_norm,
                     envelope=env1.M * math.exp(-env1.a * t) * p0_norm)


def mean_convergence_bound(weights, env1: DecayEnvelope, j: int,
                           t: float) -> BoundPair:
    """Distance of the mean started at state j from the mean started at 0:
    (1 + d_j)/W times the weighted contraction factor.  Requires W > 0."""
    W = weights.linear_floor()
    if W <= 0.0:
        raise EssentialRateError(
            "weight sequence has inf d_k/k = 0; mean bounds unavailable")
    c = (1.0 + float(weights.d(j))) / W
    return BoundPair(exact=c * env1.exact(0.0, t),
                     envelope=c * env1.M * math.exp(-env1.a * t))


# ---------------------------------------------------------------------------
# ergodicity report


@dataclass
class WeightedPart:
    weights: object
    W: float
    contraction: object          # periodic function (tabulated in general)
    envelope: DecayEnvelope
    stabilized: bool


@dataclass
class ErgodicityReport:
    model_name: str
    L_declared: float | None
    L_computed: float
    beta_floor: object
    beta_floor_mean: float
    integral_diverges: bool
    envelope: DecayEnvelope
    weighted: WeightedPart | None

    def to_dict(self) -> dict:
        out = {
            "model": self.model_name,
            "L": {"declared": self.L_declared, "computed": self.L_computed},
            "catastrophe_floor": rates.function_summary(self.beta_floor),
            "floor_period_mean": self.beta_floor_mean,
            "integral_diverges": self.integral_diverges,
            "envelope": {"M": self.envelope.M, "a": self.envelope.a},
        }
        if self.weighted is not None:
            w = self.weighted
            out["weighted"] = {
                "rule": w.weights.rule_string(),
                "W": w.W,
                "contraction": rates.function_summary(w.contraction),
                "envelope": {"M": w.envelope.M, "a": w.envelope.a},
                "stabilized": w.stabilized,
            }
        return out


def ergodicity_report(model: IntensityModel, weights=None, grid: int = 2048,
                      i_max: int | None = None) -> ErgodicityReport:
    """Assemble the full ergodicity certificate for a model: the floor, its
    envelope, and (when weights are given) the weighted contraction and its
    envelope.  Raises when the essential-rates condition fails."""
    floor = model.beta_floor_fn()
    mean = floor.period_mean()
    diverges = mean > 0.0
    if not diverges:
        raise EssentialRateError(
            "catastrophe-rate floor has nonpositive period mean; the process "
            "is not certifiably ergodic")
    env = decay_envelope(floor, grid=grid)
    weighted = None
    if weights is not None:
        period = model.period if model.period > 0 else 1.0
        ts = np.arange(grid) * (period / grid)
        vals, stabilized = weighted_contraction_rate(model, weights, ts, i_max)
        fn = (model.beta_floor_fn() if weights == ONES
              else rates.Tabulated(tuple(vals), period=period, sampled=True))
        env1 = decay_envelope(fn, grid=grid)
        weighted = WeightedPart(weights=weights, W=weights.linear_floor(),
                                contraction=fn, envelope=env1,
                                stabilized=stabilized)
    return ErgodicityReport(
        model_name=model.name,
        L_declared=model.L_declared,
        L_computed=model.L_bound(),
        beta_floor=floor,
        beta_floor_mean=mean,
        integral_diverges=diverges,
        envelope=env,
        weighted=weighted,
    )
