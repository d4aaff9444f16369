import numpy as np
import pytest

import bdcert as b


def random_model(rng: np.random.Generator, bulk_kind: str | None = None,
                 name: str = "random") -> b.IntensityModel:
    """Draw a model from the supported rate algebra with an essential
    catastrophe floor (positive period mean)."""

    def sinusoid(lo, hi, slack=1.0):
        c0 = rng.uniform(lo, hi)
        amp = rng.uniform(0.0, c0 * slack)
        phase = rng.uniform(0, 2 * np.pi)
        return b.Sinusoid(c0, amp * np.sin(phase), amp * np.cos(phase))

    birth_rule = (b.SharedRule() if rng.random() < 0.6
                  else b.CappedLinearRule(int(rng.integers(1, 4))))
    death_rule = b.CappedLinearRule(int(rng.integers(1, 5)))
    exodus_rule = b.AdditiveDecayRule(float(rng.uniform(0.0, 1.0)))
    kind = bulk_kind or rng.choice(["geometric", "power", "explicit"])
    if kind == "geometric":
        bulk_rule = b.GeometricCoefRule(float(rng.uniform(0.15, 0.5)))
    elif kind == "power":
        bulk_rule = b.PowerCoefRule(float(rng.uniform(3.0, 12.0)))
    else:
        bulk_rule = b.ExplicitCoefRule(tuple(rng.uniform(0, 0.5, size=3)))
    return b.IntensityModel(
        birth=b.RateFamily(sinusoid(0.3, 1.5), birth_rule),
        death=b.RateFamily(sinusoid(0.3, 1.5), death_rule),
        exodus=b.RateFamily(sinusoid(0.6, 2.5, slack=0.9), exodus_rule),
        bulk=b.RateFamily(sinusoid(0.2, 1.0), bulk_rule),
        period=1.0,
        name=name,
    )


def random_weights(rng: np.random.Generator, model: b.IntensityModel | None = None):
    """Random weight rule; when a model is given the rule is drawn so the
    weighted bulk-arrival series converges."""
    kind = rng.choice(["geometric", "geomlin", "ones"])
    rule = model.bulk.rule if model is not None else None
    if kind == "geometric":
        hi = 2.5
        if isinstance(rule, b.PowerCoefRule):
            kind = "geomlin"
        elif isinstance(rule, b.GeometricCoefRule):
            hi = min(hi, 0.95 / rule.ratio)
    if kind == "geometric":
        return b.GeometricWeights(float(rng.uniform(1.1, max(1.1, hi))))
    if kind == "geomlin":
        return b.GeometricThenLinearWeights(float(rng.uniform(1.1, 1.8)),
                                            int(rng.integers(5, 30)))
    return b.ONES


def certified_pair(rng: np.random.Generator):
    """(model, weights, certificate inputs) for a random draw that actually
    admits a weighted decay envelope (heavy weights can push the weighted
    contraction mean nonpositive, which is a legitimate refusal)."""
    for _ in range(40):
        m = random_model(rng)
        w = random_weights(rng, m)
        if w.linear_floor() == 0.0:
            w = b.GeometricWeights(1.2)
        try:
            return m, w, b.certificate_inputs(m, w)
        except b.EssentialRateError:
            continue
    raise RuntimeError("no certifiable random draw found")


@pytest.fixture(scope="session")
def example1():
    return b.get_preset("example1")


@pytest.fixture(scope="session")
def example2():
    return b.get_preset("example2")


@pytest.fixture(scope="session")
def example3():
    return b.get_preset("example3")


@pytest.fixture(scope="session")
def example4():
    return b.get_preset("example4")
