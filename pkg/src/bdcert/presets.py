"""Built-in benchmark models: four periodic multi-server queues with
catastrophes and bulk arrivals when empty, together with the published
constants they are usually analysed with.

All four share the catastrophe family 2 + cos(2 pi t) + 1/n.  The pairs
differ in traffic scale (S = 3 light vs S = 20 heavy) and in how the
bulk-arrival coefficients decay (geometrically as 4^-n vs polynomially as
n^-10; the polynomial case is what forces the weight sequences to switch
from geometric to linear growth).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import truncation as trunc
from .errors import ModelValidationError
from .model import (AdditiveDecayRule, CappedLinearRule, GeometricCoefRule,
                    IntensityModel, PowerCoefRule, RateFamily, SharedRule)
from .rates import Sinusoid
from .weights import GeometricThenLinearWeights, GeometricWeights


@dataclass(frozen=True)
class PublishedConstants:
    """Constants and bound values as published for the benchmark models."""

    L: float
    M: float
    a: float
    M1: float
    a1: float
    weighted_rate: Sinusoid   # the published weighted contraction rate
    N: int
    window: tuple
    tv_claim: float
    mean_claim: float
    mean_factor: float        # coefficient in the published mean-decay bound


@dataclass(frozen=True)
class Preset:
    name: str
    model: IntensityModel
    weights: object
    S: int
    published: PublishedConstants


def _queue(name: str, arrival_scale: float, servers: int, bulk_rule,
           L: float) -> IntensityModel:
    up = Sinusoid(1.0, 1.0, 0.0)     # 1 + sin(2 pi t)
    down = Sinusoid(1.0, -1.0, 0.0)  # 1 - sin(2 pi t)
    return IntensityModel(
        birth=RateFamily(Sinusoid(arrival_scale, arrival_scale, 0.0),
                         SharedRule()),
        death=RateFamily(down, CappedLinearRule(servers)),
        exodus=RateFamily(Sinusoid(2.0, 0.0, 1.0), AdditiveDecayRule(1.0)),
        bulk=RateFamily(up, bulk_rule),
        period=1.0,
        L_declared=L,
        name=name,
    )


def _presets() -> dict:
    import math
    e = math.exp
    pi = math.pi
    ex1 = Preset(
        name="example1",
        model=_queue("example1", 1.0, 3, GeometricCoefRule(0.25), 12.0),
        weights=GeometricWeights(2.0),
        S=3,
        published=PublishedConstants(
            L=12.0, M=e(1.0 / pi), a=2.0, M1=e(2.5 / pi), a1=1.5,
            weighted_rate=Sinusoid(1.5, -1.5, 1.0),
            N=30, window=(10.0, 11.0),
            tv_claim=1e-7, mean_claim=3e-6, mean_factor=3.0),
    )
    ex2 = Preset(
        name="example2",
        model=_queue("example2", 1.0, 3, PowerCoefRule(10.0), 12.0),
        weights=GeometricThenLinearWeights(1.5, 100),
        S=3,
        published=PublishedConstants(
            L=12.0, M=e(1.0 / pi), a=2.0, M1=e(1.8 / pi), a1=0.8,
            weighted_rate=Sinusoid(5.0 / 6.0, -5.0 / 6.0, 1.0),
            N=55, window=(17.0, 18.0),
            tv_claim=3e-8, mean_claim=2e-6, mean_factor=2.0),
    )
    ex3 = Preset(
        name="example3",
        model=_queue("example3", 15.0, 20, GeometricCoefRule(0.25), 74.0),
        weights=GeometricWeights(1.125),
        S=20,
        published=PublishedConstants(
            L=74.0, M=e(1.0 / pi), a=2.0, M1=e(3.0 / pi), a1=0.2,
            weighted_rate=Sinusoid(559.0 / 2520.0, -143.0 / 72.0, 1.0),
            N=220, window=(60.0, 61.0),
            tv_claim=3e-8, mean_claim=6e-6, mean_factor=3.0),
    )
    ex4 = Preset(
        name="example4",
        model=_queue("example4", 15.0, 20, PowerCoefRule(10.0), 74.0),
        weights=GeometricThenLinearWeights(1.125, 200),
        S=20,
        published=PublishedConstants(
            L=74.0, M=e(1.0 / pi), a=2.0, M1=e(3.0 / pi), a1=0.2,
            weighted_rate=Sinusoid(17.0 / 72.0, -143.0 / 72.0, 1.0),
            N=220, window=(56.0, 57.0),
            tv_claim=3e-8, mean_claim=6e-6, mean_factor=3.0),
    )
    return {p.name: p for p in (ex1, ex2, ex3, ex4)}


PRESETS = _presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ModelValidationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def published_inputs(preset: Preset) -> trunc.CertificateInputs:
    """Certificate inputs pinned to the published constants, so the published
    bound values reproduce arithmetically."""
    pub = preset.published
    return trunc.pinned_inputs(
        preset.model, preset.weights, L=pub.L, M=pub.M, a=pub.a, M1=pub.M1,
        a1=pub.a1, contraction=pub.weighted_rate)
