"""Uniform-in-time truncation error certificates.

Everything reduces to a handful of scalar constants.  With M, a certifying
the total-variation decay of the solution operator, M1, a1 certifying the
weighted decay, L the uniform diagonal bound, theta the peak of the
catastrophe-rate floor, R the bulk-arrival tail mass past the cut, d_N the
weight at the cut and d_k the initial weighted norm (point mass at k), the
total-variation error of the level-N truncation is bounded for every t by

    2*M*R/a  +  (2*M*M1*L)/(a*d_N) * (theta/a1 + exp(-a1*t)*d_k)

and the mean error by N times that plus the tail-mean term
M1*sup_i(i/d_{N+i})*(theta/a1 + exp(-a1*t)*d_k).  Both are nonincreasing in
t and in N, so the smallest admissible N is found by doubling and bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import DecayEnvelope, decay_envelope, weighted_contraction_fn
from .errors import EssentialRateError, SeriesDivergenceError, TruncationTargetError
from .model import IntensityModel, truncation_defect_action  # noqa: F401  (re-export)


def floor_peak(model: IntensityModel) -> float:
    """Any constant >= sup over t of the catastrophe-rate floor works in the
    bound; we return the exact supremum (closed form for the sinusoid
    algebra, inflated grid maximum otherwise)."""
    return model.beta_floor_fn().sup()


def bulk_tail_sup(model: IntensityModel, N: int) -> float:
    """sup over t of sum_{n > N} r_n(t)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return model.bulk.series_tail_sup(N)


@dataclass
class CertificateInputs:
    """Model-level constants shared by every candidate truncation level.

    Built once per (model, weights) pair; in pinned mode the envelopes and L
    come from published constants instead of the self-certified ones.
    """

    model: IntensityModel
    weights: object
    L: float
    envelope: DecayEnvelope          # total-variation decay (M, a)
    weighted_envelope: DecayEnvelope  # weighted decay (M1, a1)
    theta: float
    W: float
    mode: str = "self-certified"

    @property
    def M(self) -> float:
        return self.envelope.M

    @property
    def a(self) -> float:
        return self.envelope.a

    @property
    def M1(self) -> float:
        return self.weighted_envelope.M

    @property
    def a1(self) -> float:
        return self.weighted_envelope.a


def certificate_inputs(model: IntensityModel, weights, grid: int = 2048,
                       i_max: int | None = None) -> CertificateInputs:
    floor = model.beta_floor_fn()
    env = decay_envelope(floor, grid=grid)
    contraction = weighted_contraction_fn(model, weights, grid=grid, i_max=i_max)
    env1 = decay_envelope(contraction, grid=grid)
    return CertificateInputs(
        model=model, weights=weights, L=model.L_bound(), envelope=env,
        weighted_envelope=env1, theta=floor_peak(model),
        W=weights.linear_floor(), mode="self-certified")


def pinned_inputs(model: IntensityModel, weights, L: float, M: float,
                  a: float, M1: float, a1: float,
                  contraction=None) -> CertificateInputs:
    """Inputs with externally published constants (no self-certification).
    The envelopes wrap the declared rates so exact-integral forms still use
    the declared contraction functions when given."""
    floor = model.beta_floor_fn()
    env = DecayEnvelope(M=M, a=a, source=floor)
    env1 = DecayEnvelope(M=M1, a=a1, source=contraction or floor)
    return CertificateInputs(model=model, weights=weights, L=max(L, 0.0),
                             envelope=env, weighted_envelope=env1,
                             theta=floor_peak(model),
                             W=weights.linear_floor(), mode="pinned")


@dataclass
class BoundCertificate:
    """A truncation level together with every constant entering the bounds.

    ``tv_bound(t)`` and ``mean_bound(t)`` evaluate the certified error at
    time t; both are nonincreasing in t with a strictly positive t -> inf
    floor, which is what makes the certificate uniform in time.
    """

    N: int
    k: int
    window: tuple
    target: float
    which: str
    mode: str
    L: float
    M: float
    a: float
    M1: float
    a1: float
    theta: float
    W: float
    tail_mass: float          # sup_t of the bulk series past N
    d_N: float
    tail_index_sup: float     # sup_i i / d_{N+i}
    init_weighted_norm: float  # d_k
    weights_rule: str
    min_window_start: float = math.nan
    floor_tv: float = 0.0
    floor_mean: float = 0.0
    _extra: dict = field(default_factory=dict)

    def _transient(self, t: float) -> float:
        return self.theta / self.a1 + math.exp(-self.a1 * t) * self.init_weighted_norm

    def tv_bound(self, t: float) -> float:
        head = 2.0 * self.M * self.tail_mass / self.a
        body = 2.0 * self.M * self.M1 * self.L / (self.a * self.d_N)
        return head + body * self._transient(t)

    def mean_bound(self, t: float) -> float:
        return (self.N * self.tv_bound(t)
                + self.M1 * self.tail_index_sup * self._transient(t))

    def bound(self, t: float) -> float:
        return self.mean_bound(t) if self.which == "mean" else self.tv_bound(t)

    def to_dict(self) -> dict:
        return {
            "level": self.N,
            "initial_state": self.k,
            "window": list(self.window),
            "target": self.target,
            "which": self.which,
            "mode": self.mode,
            "constants": {
                "L": self.L, "M": self.M, "a": self.a,
                "M1": self.M1, "a1": self.a1,
                "theta": self.theta, "W": self.W,
                "bulk_tail": self.tail_mass,
                "weight_at_level": self.d_N,
                "tail_index_sup": self.tail_index_sup,
                "initial_weighted_norm": self.init_weighted_norm,
                "weights": self.weights_rule,
            },
            "tv_bound_at_window": [self.tv_bound(self.window[0]),
                                   self.tv_bound(self.window[1])],
            "mean_bound_at_window": [self.mean_bound(self.window[0]),
                                     self.mean_bound(self.window[1])],
            "uniform_floor": {"tv": self.floor_tv, "mean": self.floor_mean},
            "min_window_start": self.min_window_start,
            **self._extra,
        }


def _mean_preconditions(inputs: CertificateInputs) -> None:
    if inputs.W <= 0.0:
        raise EssentialRateError(
            "mean bound needs W = inf d_k/k > 0; the chosen weights give 0")
    inputs.model.bulk.rule.index_coef_sum()  # raises if sum n*r_n diverges


def make_certificate(inputs: CertificateInputs, N: int, k: int,
                     window: tuple, target: float = math.inf,
                     which: str = "tv") -> BoundCertificate:
    if k > N:
        raise TruncationTargetError(
            f"initial state {k} lies outside the truncation level {N}")
    if which == "mean":
        _mean_preconditions(inputs)
    w = inputs.weights
    cert = BoundCertificate(
        N=N, k=k, window=tuple(window), target=target, which=which,
        mode=inputs.mode,
        L=inputs.L, M=inputs.M, a=inputs.a, M1=inputs.M1, a1=inputs.a1,
        theta=inputs.theta, W=inputs.W,
        tail_mass=bulk_tail_sup(inputs.model, N),
        d_N=float(w.d(N)),
        tail_index_sup=w.tail_index_sup(N),
        init_weighted_norm=float(w.d(k)),
        weights_rule=w.rule_string(),
    )
    cert.floor_tv, cert.floor_mean = _uniform_floors(inputs, window[0], k)
    cert.min_window_start = _min_window_start(cert, target)
    return cert


def tv_truncation_bound(inputs: CertificateInputs, N: int, k: int,
                        t: float) -> float:
    """Total-variation truncation error at time t for a point mass at k."""
    return make_certificate(inputs, N, k, (t, t)).tv_bound(t)


def mean_truncation_bound(inputs: CertificateInputs, N: int, k: int,
                          t: float) -> float:
    """Mean truncation error at time t; requires a summable index series and
    W > 0."""
    return make_certificate(inputs, N, k, (t, t), which="mean").mean_bound(t)


def _uniform_floors(inputs: CertificateInputs, t0: float, k: int):
    """N -> inf limits of the two bounds at the window start; a target below
    the relevant floor is unreachable at any truncation level."""
    w = inputs.weights
    trans = inputs.theta / inputs.a1 + math.exp(-inputs.a1 * t0) * float(w.d(k))
    _, _, inv_lim = w.ratio_limits()
    tv_floor = 2.0 * inputs.M * inputs.M1 * inputs.L / inputs.a * inv_lim * trans
    lvl = w.level_ratio_limit()
    if math.isinf(lvl):
        mean_floor = math.inf
    else:
        mean_floor = (2.0 * inputs.M * inputs.M1 * inputs.L / inputs.a * lvl
                      + inputs.M1 * lvl) * trans
    return tv_floor, mean_floor


def _min_window_start(cert: BoundCertificate, target: float) -> float:
    """Smallest t at which the certified bound meets the target (the window
    choice is otherwise free, so report where it starts being admissible)."""
    if not math.isfinite(target):
        return 0.0
    if cert.bound(0.0) <= target:
        return 0.0
    # bound(t) = A + B * exp(-a1 t) with A, B >= 0
    b1 = cert.bound(1.0)
    b0 = cert.bound(0.0)
    B = (b0 - b1) / (1.0 - math.exp(-cert.a1))
    A = b0 - B
    if target <= A or B <= 0.0:
        return math.inf
    return -math.log((target - A) / B) / cert.a1


def select_truncation(inputs: CertificateInputs, target: float,
                      window: tuple, k: int = 0, which: str = "tv",
                      n_cap: int = 10 ** 6) -> BoundCertificate:
    """Smallest truncation level whose certified bound over the whole window
    is at most the target.

    Both bounds are nonincreasing in t, so the window start is the binding
    time.  The search doubles N until the bound passes, then bisects; ties
    break to the smaller level.
    """
    if target <= 0:
        raise TruncationTargetError("target must be positive")
    if which not in ("tv", "mean"):
        raise TruncationTargetError(f"unknown bound kind {which!r}")
    if which == "mean":
        _mean_preconditions(inputs)
    t0 = window[0]
    floor_tv, floor_mean = _uniform_floors(inputs, t0, k)
    floor = floor_mean if which == "mean" else floor_tv
    if target <= floor:
        raise TruncationTargetError(
            f"target {target:g} is below the uniform-in-time floor {floor:g} "
            f"for these weights; no truncation level can reach it")

    def bound_at(N: int) -> float:
        return make_certificate(inputs, N, k, window, target, which).bound(t0)

    N = max(1, k)
    while bound_at(N) > target:
        if N >= n_cap:
            raise TruncationTargetError(
                f"no level up to {n_cap} meets target {target:g} "
                f"(bound floor {floor:g})")
        N = min(2 * N, n_cap)
    lo = max(1, k)
    hi = N
    while lo < hi:
        mid = (lo + hi) // 2
        if mid < max(1, k) or bound_at(mid) > target:
            lo = mid + 1
        else:
            hi = mid
    return make_certificate(inputs, hi, k, window, target, which)
