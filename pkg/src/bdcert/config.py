"""Model description files: a small JSON schema mapping one-to-one onto the
rate algebra.  See docs/model-config.md for the written contract."""

from __future__ import annotations

import json
from pathlib import Path

from . import rates
from .errors import ModelValidationError
from .model import (AdditiveDecayRule, CappedLinearRule, ExplicitCoefRule,
                    GeometricCoefRule, IntensityModel, PowerCoefRule,
                    RateFamily, SharedRule)

_RATE_KINDS = {
    "constant": lambda c: rates.Constant(float(c["value"])),
    "sinusoidal-affine": lambda c: rates.Sinusoid(
        float(c["c0"]), float(c.get("c1", 0.0)), float(c.get("c2", 0.0)),
        float(c.get("period", 1.0))),
    "tabulated-periodic": lambda c: rates.Tabulated(
        tuple(float(v) for v in c["values"]), float(c.get("period", 1.0))),
    "expression": lambda c: rates.Expression(
        str(c["expr"]), float(c.get("period", 1.0)),
        int(c.get("grid", 2048))),
}

_RULE_KINDS = {
    "shared": lambda c: SharedRule(),
    "capped-linear": lambda c: CappedLinearRule(int(c["cap"])),
    "additive-decay": lambda c: AdditiveDecayRule(float(c["coef"])),
    "geometric": lambda c: GeometricCoefRule(float(c["ratio"])),
    "power": lambda c: PowerCoefRule(float(c["exponent"])),
    "explicit": lambda c: ExplicitCoefRule(tuple(float(v) for v in c["coefs"])),
}


def rate_from_config(cfg: dict):
    try:
        kind = cfg["kind"]
        return _RATE_KINDS[kind](cfg)
    except KeyError as exc:
        raise ModelValidationError(
            f"bad rate function config {cfg!r}: missing {exc}") from exc


def rate_to_config(f) -> dict:
    if isinstance(f, rates.Constant):
        return {"kind": "constant", "value": f.value}
    if isinstance(f, rates.Sinusoid):
        return {"kind": "sinusoidal-affine", "c0": f.c0, "c1": f.c1,
                "c2": f.c2, "period": f.period}
    if isinstance(f, rates.Tabulated):
        return {"kind": "tabulated-periodic", "values": list(f.values),
                "period": f.period}
    if isinstance(f, rates.Expression):
        return {"kind": "expression", "expr": f.expr, "period": f.period,
                "grid": f.grid}
    raise ModelValidationError(f"cannot serialize rate function {f!r}")


def family_from_config(cfg: dict) -> RateFamily:
    try:
        base = rate_from_config(cfg["base"])
        rule_cfg = cfg["rule"]
        rule = _RULE_KINDS[rule_cfg["kind"]](rule_cfg)
    except KeyError as exc:
        raise ModelValidationError(f"bad family config: missing {exc}") from exc
    return RateFamily(base, rule)


def family_to_config(fam: RateFamily) -> dict:
    return {"base": rate_to_config(fam.base), "rule": fam.rule.to_config()}


def model_from_config(cfg: dict) -> IntensityModel:
    for key in ("period", "birth", "death", "exodus", "bulk_arrival"):
        if key not in cfg:
            raise ModelValidationError(f"model config missing field {key!r}")
    tails = cfg.get("tails") or {}
    override = None
    if "beta_star" in tails:
        override = rate_from_config(tails["beta_star"])
    return IntensityModel(
        birth=family_from_config(cfg["birth"]),
        death=family_from_config(cfg["death"]),
        exodus=family_from_config(cfg["exodus"]),
        bulk=family_from_config(cfg["bulk_arrival"]),
        period=float(cfg["period"]),
        L_declared=(float(cfg["L"]) if cfg.get("L") is not None else None),
        name=str(cfg.get("name", "model")),
        beta_floor_override=override,
    )


def model_to_config(model: IntensityModel) -> dict:
    cfg = {
        "name": model.name,
        "period": model.period,
        "L": model.L_declared,
        "birth": family_to_config(model.birth),
        "death": family_to_config(model.death),
        "exodus": family_to_config(model.exodus),
        "bulk_arrival": family_to_config(model.bulk),
    }
    if model.beta_floor_override is not None:
        cfg["tails"] = {"beta_star": rate_to_config(model.beta_floor_override)}
    return cfg


def load_model(path: str | Path) -> IntensityModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_config(json.load(fh))


def save_model(model: IntensityModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_config(model), indent=2) + "\n",
                          encoding="utf-8")
