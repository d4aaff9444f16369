"""Nondecreasing weight sequences d_0 = 1 <= d_1 <= d_2 <= ... for the
weighted-l1 norm, with the derived constants the bound formulas consume.

Three rules are supported: pure geometric growth, geometric growth switching
to linear growth at an index, and an explicit prefix with a declared tail.
All derived quantities (inf_k d_k/k, sup_i i/d_{N+i}, ratio limits) are
computed per rule in closed form, never by unbounded probing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelValidationError


@dataclass(frozen=True)
class GeometricWeights:
    """d_n = base**n with base >= 1 (base == 1 gives the unweighted norm)."""

    base: float

    def __post_init__(self):
        if self.base < 1.0:
            raise ModelValidationError("geometric weight base must be >= 1")

    def d(self, n):
        # np.power saturates to inf instead of raising on huge exponents
        with np.errstate(over="ignore"):
            out = np.power(self.base, np.asarray(n, dtype=float))
        return float(out) if np.ndim(n) == 0 else out

    def log_d(self, n):
        return math.log(self.base) * np.asarray(n, dtype=float)

    def linear_floor(self) -> float:
        """inf over k >= 1 of d_k / k."""
        if self.base == 1.0:
            return 0.0
        kmax = int(math.ceil(1.0 / math.log(self.base))) + 2
        ks = np.arange(1, kmax + 1, dtype=float)
        return float(np.min(self.base ** ks / ks))

    def tail_index_sup(self, N: int) -> float:
        """sup over i >= 1 of i / d_{N+i}."""
        if self.base == 1.0:
            return math.inf
        istar = 1.0 / math.log(self.base)
        cands = {1, int(math.floor(istar)), int(math.ceil(istar)),
                 int(math.ceil(istar)) + 1}
        best = max(i / self.base ** (N + i) for i in cands if i >= 1)
        return float(best)

    def ratio_limits(self):
        # lim d_{i+1}/d_i, lim d_{i-1}/d_i, lim 1/d_i
        if self.base == 1.0:
            return 1.0, 1.0, 1.0
        return self.base, 1.0 / self.base, 0.0

    def level_ratio_limit(self) -> float:
        """lim N/d_N (zero iff the weights outgrow every polynomial)."""
        return math.inf if self.base == 1.0 else 0.0

    def rule_string(self) -> str:
        return "ones" if self.base == 1.0 else f"geometric:{self.base:g}"


@dataclass(frozen=True)
class GeometricThenLinearWeights:
    """d_n = base**n below `switch`, then base**switch * (n+1)/switch."""

    base: float
    switch: int

    def __post_init__(self):
        if self.base < 1.0:
            raise ModelValidationError("geometric weight base must be >= 1")
        if self.switch < 1:
            raise ModelValidationError("switch index must be >= 1")

    def _cap(self) -> float:
        return self.base ** self.switch

    def d(self, n):
        ns = np.asarray(n, dtype=float)
        geo = self.base ** np.minimum(ns, self.switch)
        lin = self._cap() * (ns + 1.0) / self.switch
        out = np.where(ns < self.switch, geo, lin)
        return float(out) if np.ndim(n) == 0 else out

    def linear_floor(self) -> float:
        geo_part = math.inf
        if self.base > 1.0:
            kmax = min(self.switch - 1,
                       int(math.ceil(1.0 / math.log(self.base))) + 2)
        else:
            kmax = self.switch - 1
        if kmax >= 1:
            ks = np.arange(1, kmax + 1, dtype=float)
            geo_part = float(np.min(self.base ** ks / ks))
        return min(geo_part, self._cap() / self.switch)

    def tail_index_sup(self, N: int) -> float:
        lin_sup = self.switch / self._cap()  # limit i -> inf, linear regime
        if N >= self.switch:
            return lin_sup
        best = lin_sup
        if self.base > 1.0:
            istar = 1.0 / math.log(self.base)
            cands = [i for i in {1, int(math.floor(istar)),
                                 int(math.ceil(istar)),
                                 int(math.ceil(istar)) + 1}
                     if 1 <= i <= self.switch - 1 - N]
        else:
            cands = list(range(1, self.switch - N))
        for i in cands:
            best = max(best, i / self.base ** (N + i))
        return float(best)

    def ratio_limits(self):
        return 1.0, 1.0, 0.0

    def level_ratio_limit(self) -> float:
        return self.switch / self._cap()

    def rule_string(self) -> str:
        return f"geometric-linear:{self.base:g}:{self.switch}"


@dataclass(frozen=True)
class ExplicitWeights:
    """Explicit prefix (values[0] must be 1) continued by a declared tail:
    ``constant`` repeats the last value, ``linear`` continues with the last
    increment."""

    values: tuple
    tail: str = "constant"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ModelValidationError("explicit weights need >= 2 values")
        if abs(vals[0] - 1.0) > 1e-12:
            raise ModelValidationError("d_0 must equal 1")
        if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
            raise ModelValidationError("weights must be nondecreasing")
        if self.tail not in ("constant", "linear"):
            raise ModelValidationError(f"unknown weight tail rule {self.tail!r}")
        object.__setattr__(self, "values", vals)

    def _slope(self) -> float:
        if self.tail == "constant":
            return 0.0
        return self.values[-1] - self.values[-2]

    def d(self, n):
        ns = np.asarray(n, dtype=float)
        last = len(self.values) - 1
        idx = np.clip(ns, 0, last).astype(int)
        arr = np.asarray(self.values, dtype=float)[idx]
        over = np.maximum(ns - last, 0.0)
        out = arr + self._slope() * over
        return float(out) if np.ndim(n) == 0 else out

    def linear_floor(self) -> float:
        last = len(self.values) - 1
        ks = np.arange(1, last + 1, dtype=float)
        probe = float(np.min(np.asarray(self.values[1:]) / ks))
        s = self._slope()
        # d_k/k -> slope as k -> inf (0 for a constant tail)
        return min(probe, s)

    def tail_index_sup(self, N: int) -> float:
        s = self._slope()
        if s == 0.0:
            return math.inf
        last = len(self.values) - 1
        best = 1.0 / s  # limit in the linear tail
        for i in range(1, max(2, last - N) + 2):
            best = max(best, i / float(self.d(N + i)))
        return float(best)

    def ratio_limits(self):
        if self._slope() == 0.0:
            return 1.0, 1.0, 1.0 / self.values[-1]
        return 1.0, 1.0, 0.0

    def level_ratio_limit(self) -> float:
        s = self._slope()
        return math.inf if s == 0.0 else 1.0 / s

    def rule_string(self) -> str:
        vals = ",".join(f"{v:g}" for v in self.values)
        return f"explicit:{vals}:{self.tail}"


ONES = GeometricWeights(1.0)


def weighted_norm(weights, y: np.ndarray) -> float:
    """||y||_{1D} = sum_n d_n |y_n|."""
    y = np.asarray(y, dtype=float)
    return float(np.sum(weights.d(np.arange(y.size)) * np.abs(y)))


def parse_weights(spec: str):
    """Parse a rule string: ``ones``, ``geometric:B``,
    ``geometric-linear:B:N0`` or ``explicit:v0,v1,...:tail``."""
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "ones":
            return ONES
        if kind == "geometric":
            return GeometricWeights(float(parts[1]))
        if kind in ("geometric-linear", "geomlin"):
            return GeometricThenLinearWeights(float(parts[1]), int(parts[2]))
        if kind == "explicit":
            vals = tuple(float(v) for v in parts[1].split(","))
            tail = parts[2] if len(parts) > 2 else "constant"
            return ExplicitWeights(vals, tail)
    except (IndexError, ValueError) as exc:
        raise ModelValidationError(f"bad weight rule {spec!r}: {exc}") from exc
    raise ModelValidationError(f"unknown weight rule kind {kind!r}")
