"""Fixed-step RK4 integration of the truncated forward equations and the
extraction of limiting periodic characteristics.

The system is linear with moderate stiffness bounded by the diagonal bound L,
so an explicit fourth-order scheme with an L-aware step is adequate and keeps
certified outputs reproducible (no adaptive-controller nondeterminism).
Matrix actions use the sparse column structure, O(N) per product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import truncation as trunc
from .bounds import ergodicity_bound
from .errors import (EssentialRateError, IntegrationError,
                     ModelValidationError, TruncationTargetError)
from .model import IntensityModel, apply_generator, rate_arrays
from .weights import weighted_norm


def default_step(model: IntensityModel) -> float:
    return min(0.01, 0.1 / max(model.L_bound(), 1e-12))


def delta_vector(N: int, k: int) -> np.ndarray:
    if not 0 <= k <= N:
        raise ModelValidationError(f"state {k} outside 0..{N}")
    y = np.zeros(N + 1)
    y[k] = 1.0
    return y


def mean_of(v: np.ndarray) -> float:
    """First moment sum_i i*v_i of a distribution vector."""
    v = np.asarray(v, dtype=float)
    return float(np.arange(v.size) @ v)


@dataclass
class Trajectory:
    """Solution samples on a uniform output grid, plus integrator metadata."""

    times: np.ndarray
    states: np.ndarray            # shape (len(times), N+1)
    N: int
    variant: str
    step: float
    method: str = "rk4"
    error_estimate: float | None = None

    def index_of(self, t: float) -> int:
        i = int(round((t - self.times[0]) / (self.times[1] - self.times[0])))
        if i < 0 or i >= len(self.times) or abs(self.times[i] - t) > 1e-9:
            raise IntegrationError(f"time {t} is not on the output grid")
        return i

    def at(self, t: float) -> np.ndarray:
        return self.states[self.index_of(t)]

    def probabilities(self, t: float) -> np.ndarray:
        """State vector with tiny negative noise clamped (output only; raw
        values stay untouched for the linear-identity checks)."""
        return np.clip(self.at(t), 0.0, None)

    def p0(self) -> np.ndarray:
        return self.states[:, 0].copy()

    def head_mass(self, S: int) -> np.ndarray:
        return self.states[:, :S + 1].sum(axis=1)

    def means(self) -> np.ndarray:
        return self.states @ np.arange(self.N + 1, dtype=float)

    def weighted_norms(self, weights) -> np.ndarray:
        d = weights.d(np.arange(self.N + 1))
        return np.abs(self.states) @ d


def _rk4(model: IntensityModel, N: int, y0: np.ndarray, t0: float, t1: float,
         step: float, shifted: bool, out_every: int):
    n_steps = max(1, int(round((t1 - t0) / step)))
    h = (t1 - t0) / n_steps
    n_out = n_steps // out_every
    times = t0 + np.arange(n_out + 1) * (h * out_every)
    states = np.empty((n_out + 1, N + 1))
    y = np.asarray(y0, dtype=float).copy()
    states[0] = y
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)

    def rhs(t, v, out):
        arrs = rate_arrays(model, N, t)
        apply_generator(arrs, v, shifted, out)
        if shifted:
            out[0] += arrs[5]  # the constant inflow g(t) = (floor, 0, ...)
        return out

    row = 0
    for s in range(n_steps):
        t = t0 + s * h
        rhs(t, y, k1)
        rhs(t + 0.5 * h, y + 0.5 * h * k1, k2)
        rhs(t + 0.5 * h, y + 0.5 * h * k2, k3)
        rhs(t + h, y + h * k3, k4)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (s + 1) % out_every == 0:
            row += 1
            states[row] = y
    if float(states.min()) < -1e-8:
        raise IntegrationError(
            f"integration produced entries below -1e-8 "
            f"(min {states.min():.3e}); reduce the step")
    return times, states


def integrate(model: IntensityModel, N: int, y0: np.ndarray, t0: float,
              t1: float, step: float | None = None,
              output_dt: float | None = None, variant: str = "shifted",
              error_estimate: bool = False) -> Trajectory:
    """Integrate the level-N system from y0 over [t0, t1].

    The shifted variant solves dy/dt = A*_N(t) y + (floor(t), 0, ..., 0)^T;
    the plain variant solves dy/dt = A_N(t) y.  The output grid is uniform
    with spacing output_dt (default period/100) and the step is snapped so
    the grid lies exactly on integrator steps.  When ``error_estimate`` is
    set, the run is repeated at half the step and the largest l1 deviation
    over the grid is recorded (fourth-order step-doubling estimate).
    """
    y0 = np.asarray(y0, dtype=float)
    if y0.size != N + 1:
        raise ModelValidationError("y0 must have length N+1")
    if t1 <= t0:
        raise ModelValidationError("need t1 > t0")
    if variant not in ("plain", "shifted"):
        raise ModelValidationError(f"unknown variant {variant!r}")
    if step is None:
        step = default_step(model)
    L = model.L_bound()
    if step * 2.0 * L > 0.5:
        raise IntegrationError(
            f"step {step:g} too large for stiffness scale L={L:g} "
            f"(need step*2L <= 0.5)")
    period = model.period if model.period > 0 else 1.0
    if output_dt is None:
        output_dt = period / 100.0
    output_dt = min(output_dt, t1 - t0)
    out_every = max(1, int(math.ceil(output_dt / step)))
    # snap: an integer number of output cells covers the horizon exactly
    n_cells = max(1, int(round((t1 - t0) / output_dt)))
    output_dt = (t1 - t0) / n_cells
    step = output_dt / out_every

    times, states = _rk4(model, N, y0, t0, t1, step, variant == "shifted",
                         out_every)
    est = None
    if error_estimate:
        _, fine = _rk4(model, N, y0, t0, t1, step / 2.0, variant == "shifted",
                       out_every * 2)
        est = float(np.max(np.abs(states - fine).sum(axis=1)))
    return Trajectory(times=times, states=states, N=N, variant=variant,
                      step=step, error_estimate=est)


def solve_full_system(model: IntensityModel, N: int, p0: np.ndarray,
                      t0: float, t1: float, step: float | None = None,
                      output_dt: float | None = None,
                      variant: str = "plain",
                      error_estimate: bool = False) -> Trajectory:
    """Reference-solution mode: the same integrator at a large level, in
    either formulation.  On the stochastic simplex the shifted system is an
    exact rearrangement of the plain one, so the two variants must agree to
    integrator tolerance as long as mass has not leaked past the cut."""
    return integrate(model, N, p0, t0, t1, step=step, output_dt=output_dt,
                     variant=variant, error_estimate=error_estimate)


# ---------------------------------------------------------------------------
# limiting periodic regime


@dataclass
class LimitingRegime:
    """One period of the limiting characteristics with its certificate."""

    times: np.ndarray
    p0: np.ndarray
    head_mass: np.ndarray
    mean: np.ndarray
    S: int
    t_star: float
    certificate: trunc.BoundCertificate
    periodicity_defect: float
    defect_allowance: float
    integrator_estimate: float
    target: float

    def rows(self):
        for i, t in enumerate(self.times):
            yield (float(t), float(self.p0[i]), float(self.head_mass[i]),
                   float(self.mean[i]), self.certificate.tv_bound(float(t)),
                   self.certificate.mean_bound(float(t)))


def _settle_time(inputs: trunc.CertificateInputs, target: float,
                 period: float, want_mean: bool, cap: int = 10 ** 6) -> float:
    """First period boundary where both solutions from arbitrary starts and
    (when the mean is requested) the weighted distance to the periodic
    solution are certifiably below target/2."""
    floor = inputs.model.beta_floor_fn()
    need_tv = target / 2.0
    m = 1
    while 2.0 * math.exp(-floor.integral(0.0, m * period)) > need_tv:
        m += 1
        if m > cap:
            raise EssentialRateError("ergodicity bound does not reach target")
    if want_mean:
        # distance of the mean to the limiting mean: the periodic solution's
        # weighted norm is at most M1*theta/a1, so the initial weighted
        # distance from a point mass at k=0 is at most 1 + M1*theta/a1
        if inputs.W <= 0.0:
            raise EssentialRateError("mean regime needs W > 0")
        b0 = 1.0 + inputs.M1 * inputs.theta / inputs.a1
        fn = inputs.weighted_envelope.source
        while (b0 / inputs.W) * math.exp(-fn.integral(0.0, m * period)) > need_tv:
            m += 1
            if m > cap:
                raise EssentialRateError(
                    "weighted ergodicity bound does not reach target")
    return m * period


def limiting_regime(model: IntensityModel, weights, target: float, S: int,
                    k: int = 0, inputs: trunc.CertificateInputs | None = None,
                    step: float | None = None,
                    samples_per_period: int = 100) -> LimitingRegime:
    """Compute the limiting periodic regime to a guaranteed total accuracy.

    Splits the budget evenly: the truncation certificate gets target/2 and
    the settle time t* is pushed until the ergodicity bounds certify that the
    transient is below target/2.  Integrates a point mass at k from 0 to
    t* + period and returns the final period.
    """
    if target <= 0:
        raise TruncationTargetError("target must be positive")
    if inputs is None:
        inputs = trunc.certificate_inputs(model, weights)
    if model.beta_floor_fn().period_mean() <= 0.0:
        raise EssentialRateError(
            "catastrophe-rate floor has nonpositive mean; no limiting regime "
            "certificate")
    period = model.period if model.period > 0 else 1.0
    t_star = _settle_time(inputs, target, period, want_mean=True)
    window = (t_star, t_star + period)
    cert_tv = trunc.select_truncation(inputs, target / 2.0, window, k=k,
                                      which="tv")
    cert_mean = trunc.select_truncation(inputs, target / 2.0, window, k=k,
                                        which="mean")
    N = max(cert_tv.N, cert_mean.N)
    cert = trunc.make_certificate(inputs, N, k, window, target / 2.0,
                                  which="mean")

    traj = integrate(model, N, delta_vector(N, k), 0.0, window[1], step=step,
                     output_dt=period / samples_per_period,
                     variant="shifted", error_estimate=True)
    i0 = traj.index_of(window[0])
    times = traj.times[i0:]
    block = np.clip(traj.states[i0:], 0.0, None)
    p0 = block[:, 0]
    head = block[:, :S + 1].sum(axis=1)
    mean = block @ np.arange(N + 1, dtype=float)

    defect = float(np.abs(traj.at(window[1]) - traj.at(window[0])).sum())
    erg = ergodicity_bound(inputs.envelope, t_star)
    allowance = erg.exact + 2.0 * (traj.error_estimate or 0.0)
    return LimitingRegime(times=times, p0=p0, head_mass=head, mean=mean, S=S,
                          t_star=t_star, certificate=cert,
                          periodicity_defect=defect,
                          defect_allowance=allowance,
                          integrator_estimate=traj.error_estimate or 0.0,
                          target=target)
