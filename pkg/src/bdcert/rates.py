"""Periodic scalar functions of time: the closed algebra the engine works in.

Every time-varying quantity (transition intensities, contraction rates) is one
of four kinds: a constant, a sinusoid-affine function c0 + c1*sin(2*pi*t/P) +
c2*cos(2*pi*t/P), a tabulated periodic function with linear interpolation, or
a user expression.  The first two admit closed-form integrals, suprema and
period means; the other two fall back to their sample grid.  Functions here
are allowed to be negative (weighted contraction rates dip below zero); the
model layer enforces nonnegativity where a function is used as an intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelValidationError

_TWO_PI = 2.0 * math.pi


def _is_scalar(t) -> bool:
    return isinstance(t, (int, float, np.floating, np.integer))


@dataclass(frozen=True)
class Constant:
    """Constant function; period 0 marks it as aperiodic."""

    value: float

    period: float = 0.0

    def __call__(self, t):
        if _is_scalar(t):
            return float(self.value)
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def integral(self, a: float, b: float) -> float:
        return self.value * (b - a)

    def period_mean(self) -> float:
        return float(self.value)

    def sup(self) -> float:
        return float(self.value)

    def inf(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class Sinusoid:
    """c0 + c1*sin(2*pi*t/period) + c2*cos(2*pi*t/period)."""

    c0: float
    c1: float = 0.0
    c2: float = 0.0
    period: float = 1.0

    def __post_init__(self):
        if self.period <= 0:
            raise ModelValidationError("sinusoid period must be positive")

    def __call__(self, t):
        w = _TWO_PI / self.period
        if _is_scalar(t):
            return self.c0 + self.c1 * math.sin(w * t) + self.c2 * math.cos(w * t)
        t = np.asarray(t, dtype=float)
        return self.c0 + self.c1 * np.sin(w * t) + self.c2 * np.cos(w * t)

    def integral(self, a: float, b: float) -> float:
        w = _TWO_PI / self.period
        s = self.c0 * (b - a)
        s -= self.c1 / w * (math.cos(w * b) - math.cos(w * a))
        s += self.c2 / w * (math.sin(w * b) - math.sin(w * a))
        return s

    def period_mean(self) -> float:
        return float(self.c0)

    def amplitude(self) -> float:
        return math.hypot(self.c1, self.c2)

    def sup(self) -> float:
        return self.c0 + self.amplitude()

    def inf(self) -> float:
        return self.c0 - self.amplitude()


@dataclass(frozen=True)
class Tabulated:
    """Periodic table with linear interpolation.

    ``values[k]`` is the value at t = k*period/len(values); the function wraps
    around, so the knot at t = period reuses values[0].  For the piecewise
    linear interpolant the knot extremes are the exact extremes and the
    trapezoid rule on the knots is the exact integral.
    """

    values: tuple
    period: float = 1.0
    # set True when the table was sampled from a smooth function, in which
    # case suprema get a small safety inflation
    sampled: bool = False

    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.period <= 0:
            raise ModelValidationError("tabulated period must be positive")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ModelValidationError("tabulated function needs >= 2 values")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))
        closed = np.concatenate([vals, vals[:1]])
        h = self.period / vals.size
        cum = np.concatenate([[0.0], np.cumsum((closed[:-1] + closed[1:]) * 0.5 * h)])
        object.__setattr__(self, "_cum", cum)

    def __getstate__(self):
        return {"values": self.values, "period": self.period, "sampled": self.sampled}

    def __setstate__(self, state):
        self.__init__(**state)

    def _vals(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __call__(self, t):
        vals = self._vals()
        n = vals.size
        x = np.asarray(t, dtype=float) / self.period * n
        idx = np.floor(x).astype(int) % n
        frac = x - np.floor(x)
        nxt = (idx + 1) % n
        out = vals[idx] * (1.0 - frac) + vals[nxt] * frac
        return float(out) if _is_scalar(t) else out

    def _cum_at(self, x: float) -> float:
        # exact integral of the interpolant over [0, x] for x in [0, period]
        vals = self._vals()
        n = vals.size
        h = self.period / n
        pos = x / h
        k = min(int(math.floor(pos)), n)
        frac = pos - k
        base = self._cum[k]
        if frac <= 0.0 or k >= n:
            return float(base)
        v0 = vals[k]
        v1 = vals[(k + 1) % n]
        dv = v1 - v0
        dt = frac * h
        return float(base + v0 * dt + 0.5 * dv * frac * dt)

    def integral(self, a: float, b: float) -> float:
        if b < a:
            return -self.integral(b, a)
        per = self._cum[-1]
        ka, ra = divmod(a, self.period)
        kb, rb = divmod(b, self.period)
        return (kb - ka) * per + self._cum_at(rb) - self._cum_at(ra)

    def period_mean(self) -> float:
        return float(self._cum[-1] / self.period)

    def sup(self) -> float:
        s = float(max(self.values))
        return s + 1e-9 * max(1.0, abs(s)) if self.sampled else s

    def inf(self) -> float:
        s = float(min(self.values))
        return s - 1e-9 * max(1.0, abs(s)) if self.sampled else s


_EXPR_NAMES = {name: getattr(math, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "atan", "pi", "e", "floor",
    "fabs", "pow", "tanh", "cosh", "sinh")}
_EXPR_NAMES["abs"] = abs
_EXPR_NAMES["min"] = min
_EXPR_NAMES["max"] = max


@dataclass(frozen=True)
class Expression:
    """User expression in t, evaluated in a restricted math namespace.

    Integrals/extrema come from an internal sample table; pointwise values
    are exact.
    """

    expr: str
    period: float = 1.0
    grid: int = 2048

    def _code(self):
        code = getattr(self, "_compiled", None)
        if code is None:
            code = compile(self.expr, "<rate-expression>", "eval")
            object.__setattr__(self, "_compiled", code)
        return code

    def __getstate__(self):
        return {"expr": self.expr, "period": self.period, "grid": self.grid}

    def __setstate__(self, state):
        self.__init__(**state)

    def _eval_one(self, t: float) -> float:
        env = dict(_EXPR_NAMES)
        env["t"] = float(t)
        return float(eval(self._code(), {"__builtins__": {}}, env))

    def __call__(self, t):
        if _is_scalar(t):
            return self._eval_one(t)
        t = np.asarray(t, dtype=float)
        return np.array([self._eval_one(v) for v in t.ravel()]).reshape(t.shape)

    def _table(self) -> Tabulated:
        tab = getattr(self, "_tab", None)
        if tab is None:
            ts = np.arange(self.grid) * (self.period / self.grid)
            tab = Tabulated(tuple(self._eval_one(v) for v in ts),
                            period=self.period, sampled=True)
            object.__setattr__(self, "_tab", tab)
        return tab

    def integral(self, a: float, b: float) -> float:
        return self._table().integral(a, b)

    def period_mean(self) -> float:
        return self._table().period_mean()

    def sup(self) -> float:
        return self._table().sup()

    def inf(self) -> float:
        return self._table().inf()


def combine(parts, const: float = 0.0, grid: int = 2048):
    """Linear combination sum_j coeff_j * f_j + const, kept in closed form
    whenever all parts are constants/sinusoids with one common period."""
    parts = [(float(c), f) for c, f in parts]
    period = 0.0
    closed = True
    for _, f in parts:
        if isinstance(f, Constant):
            continue
        if isinstance(f, Sinusoid):
            if period == 0.0:
                period = f.period
            elif abs(period - f.period) > 1e-12:
                closed = False
            continue
        closed = False
        period = max(period, f.period)
    if closed:
        c0, c1, c2 = const, 0.0, 0.0
        for c, f in parts:
            if isinstance(f, Constant):
                c0 += c * f.value
            else:
                c0 += c * f.c0
                c1 += c * f.c1
                c2 += c * f.c2
        if period == 0.0:
            return Constant(c0)
        return Sinusoid(c0, c1, c2, period)
    ts = np.arange(grid) * (period / grid)
    acc = np.full(grid, const)
    for c, f in parts:
        acc = acc + c * f(ts)
    return Tabulated(tuple(acc), period=period, sampled=True)


def tabulate(fn, period: float, grid: int = 2048, sampled: bool = True) -> Tabulated:
    """Sample a callable on a uniform grid over one period."""
    ts = np.arange(grid) * (period / grid)
    return Tabulated(tuple(np.asarray(fn(ts), dtype=float)), period=period,
                     sampled=sampled)


def require_nonnegative(f, what: str) -> None:
    if f.inf() < -1e-12:
        raise ModelValidationError(
            f"{what} takes negative values (inf = {f.inf():.6g})")


def function_summary(f) -> dict:
    """JSON-friendly description of a periodic function."""
    if isinstance(f, Constant):
        return {"kind": "constant", "value": f.value}
    if isinstance(f, Sinusoid):
        return {"kind": "sinusoidal-affine", "c0": f.c0, "c1": f.c1,
                "c2": f.c2, "period": f.period}
    if isinstance(f, Expression):
        return {"kind": "expression", "expr": f.expr, "period": f.period}
    return {"kind": "tabulated-periodic", "points": len(f.values),
            "period": f.period, "mean": f.period_mean(),
            "min": f.inf(), "max": f.sup()}
