"""Command-line front end.

Commands: ``bounds`` (ergodicity report), ``truncate`` (truncation
certificate), ``solve`` (one trajectory), ``regime`` (limiting periodic
characteristics), ``simulate`` (Monte Carlo cross-check) and ``report``
(computed vs published comparison).  Artifacts are written into --out
(default from $BDCERT_OUT, else ./bdcert_out); errors leave a
machine-readable JSON on stderr and a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import config as cfgmod
from . import mc, plotting, report as rpt
from . import solver, truncation as trunc
from .errors import BdcertError, ModelValidationError
from .presets import get_preset, published_inputs
from .weights import parse_weights


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("BDCERT_OUT") or "bdcert_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    """Resolve (model, weights, S, preset-or-None) from the CLI arguments."""
    preset = None
    if args.preset:
        preset = get_preset(args.preset)
        model = preset.model
        weights = preset.weights
        S = preset.S
    elif args.config:
        model = cfgmod.load_model(args.config)
        weights = None
        S = 0
    else:
        raise ModelValidationError("supply --preset or --config")
    if getattr(args, "weights", None):
        weights = parse_weights(args.weights)
    if getattr(args, "S", None) is not None:
        S = args.S
    if weights is None:
        raise ModelValidationError(
            "no weight rule: supply --weights (e.g. geometric:2)")
    return model, weights, S, preset


def _inputs(args, model, weights, preset):
    if getattr(args, "paper_constants", False):
        if preset is None:
            raise ModelValidationError(
                "--paper-constants needs a --preset with published constants")
        return published_inputs(preset)
    return trunc.certificate_inputs(model, weights, grid=args.grid)


def _window(args, default=(0.0, 1.0)):
    if not getattr(args, "window", None):
        return default
    try:
        lo, hi = (float(v) for v in args.window.split(":"))
    except ValueError as exc:
        raise ModelValidationError(
            f"bad --window {args.window!r}; expected T0:T1") from exc
    if hi <= lo:
        raise ModelValidationError("window end must exceed its start")
    return lo, hi


def cmd_bounds(args) -> int:
    model, weights, _, preset = _load(args)
    out = _out_dir(args)
    report = bnd.ergodicity_report(model, weights, grid=args.grid)
    rpt.write_json(report.to_dict(), out / "ergodicity.json")
    rpt.write_rates_csv(report, out / "contraction_rates.csv",
                        resolution=args.resolution)
    if args.plot:
        plotting.render_rates(report, out)
    print(f"wrote {out / 'ergodicity.json'}")
    print(f"wrote {out / 'contraction_rates.csv'}")
    return 0


def cmd_truncate(args) -> int:
    model, weights, _, preset = _load(args)
    out = _out_dir(args)
    inputs = _inputs(args, model, weights, preset)
    window = _window(args, default=(preset.published.window if preset
                                    else (0.0, 1.0)))
    cert = trunc.select_truncation(inputs, args.target, window, k=args.k,
                                   which=args.which)
    rpt.write_json(cert.to_dict(), out / "certificate.json")
    (out / "certificate.txt").write_text(rpt.certificate_text(cert),
                                         encoding="utf-8")
    print(rpt.certificate_text(cert))
    met = cert.bound(window[0]) <= args.target
    return 0 if met else 1


def cmd_solve(args) -> int:
    model, weights, S, preset = _load(args)
    out = _out_dir(args)
    N = args.N or (preset.published.N if preset else 50)
    y0 = solver.delta_vector(N, args.k)
    traj = solver.integrate(model, N, y0, 0.0, args.t1, step=args.step,
                            variant=args.variant, error_estimate=True)
    rpt.write_trajectory_csv(traj, S, out / "trajectory.csv")
    rpt.write_json({"N": N, "variant": traj.variant, "step": traj.step,
                    "error_estimate": traj.error_estimate},
                   out / "trajectory_meta.json")
    print(f"wrote {out / 'trajectory.csv'} (error estimate "
          f"{traj.error_estimate:.3g})")
    return 0


def cmd_regime(args) -> int:
    model, weights, S, preset = _load(args)
    out = _out_dir(args)
    inputs = _inputs(args, model, weights, preset)
    regime = solver.limiting_regime(model, weights, args.target, S, k=args.k,
                                    inputs=inputs, step=args.step)
    rpt.write_regime_csv(regime, out / "regime.csv")
    rpt.write_json(rpt.regime_metadata(regime), out / "regime_meta.json")
    if args.plot:
        plotting.render_regime(regime, out)
    print(f"wrote {out / 'regime.csv'} (N = {regime.certificate.N}, "
          f"window [{regime.t_star:g}, {regime.t_star + 1:g}])")
    ok = regime.periodicity_defect <= regime.defect_allowance
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    model, weights, S, preset = _load(args)
    out = _out_dir(args)
    times = tuple(float(v) for v in args.times.split(","))
    cfg = mc.SimConfig(paths=args.paths, horizon=max(times),
                       seed=args.seed, majorant=args.majorant,
                       workers=args.jobs)
    result = mc.simulate(model, cfg, args.k, times, S=S)
    rpt.write_mc_csv(result, out / "simulation.csv")
    print(f"wrote {out / 'simulation.csv'} ({result.paths} paths, majorant "
          f"{result.majorant:g})")
    return 0


def cmd_report(args) -> int:
    if not args.preset:
        raise ModelValidationError("report compares a --preset against its "
                                   "published constants")
    preset = get_preset(args.preset)
    out = _out_dir(args)
    cmp = rpt.compare_with_published(preset, grid=args.grid)
    rpt.write_json(cmp, out / "report.json")
    text = rpt.comparison_text(cmp)
    (out / "report.txt").write_text(text, encoding="utf-8")
    ergo = bnd.ergodicity_report(preset.model, preset.weights, grid=args.grid)
    rpt.write_rates_csv(ergo, out / "contraction_rates.csv")
    if args.plot:
        period = preset.model.period or 1.0
        ts = np.linspace(0.0, period, 512)
        computed = np.asarray(ergo.weighted.contraction(ts), dtype=float)
        published = np.asarray(preset.published.weighted_rate(ts), dtype=float)
        plotting.render_rate_comparison(ts, computed, published, out)
        plotting.render_rates(ergo, out)
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bdcert",
        description="certified transient bounds for periodic birth-death "
                    "queues with catastrophes and bulk arrivals")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, weights=True):
        sp.add_argument("--preset", help="built-in model (example1..example4)")
        sp.add_argument("--config", help="path to a model JSON file")
        sp.add_argument("--out", help="output directory (default $BDCERT_OUT "
                                      "or ./bdcert_out)")
        sp.add_argument("--grid", type=int, default=2048,
                        help="per-period grid for certified quantities")
        if weights:
            sp.add_argument("--weights",
                            help="weight rule, e.g. geometric:2, "
                                 "geometric-linear:1.5:100, ones")

    sp = sub.add_parser("bounds", help="ergodicity report and rate tables")
    common(sp)
    sp.add_argument("--resolution", type=int, default=256)
    sp.add_argument("--plot", action=argparse.BooleanOptionalAction,
                    default=True)
    sp.set_defaults(fn=cmd_bounds)

    sp = sub.add_parser("truncate", help="select a certified truncation level")
    common(sp)
    sp.add_argument("--target", type=float, required=True)
    sp.add_argument("--window", help="T0:T1 (default: the preset's window)")
    sp.add_argument("--k", type=int, default=0, help="initial state")
    sp.add_argument("--which", choices=("tv", "mean"), default="tv")
    sp.add_argument("--paper-constants", action="store_true")
    sp.set_defaults(fn=cmd_truncate)

    sp = sub.add_parser("solve", help="integrate one trajectory")
    common(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--t1", type=float, default=1.0)
    sp.add_argument("--step", type=float)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--S", type=int)
    sp.add_argument("--variant", choices=("shifted", "plain"),
                    default="shifted")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("regime", help="limiting periodic characteristics")
    common(sp)
    sp.add_argument("--target", type=float, required=True)
    sp.add_argument("--S", type=int)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--step", type=float)
    sp.add_argument("--paper-constants", action="store_true")
    sp.add_argument("--plot", action=argparse.BooleanOptionalAction,
                    default=True)
    sp.set_defaults(fn=cmd_regime)

    sp = sub.add_parser("simulate", help="Monte Carlo cross-check")
    common(sp)
    sp.add_argument("--paths", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--times", default="1.0",
                    help="comma-separated observation times")
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--S", type=int)
    sp.add_argument("--majorant", type=float)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("report", help="computed vs published comparison")
    common(sp)
    sp.add_argument("--plot", action=argparse.BooleanOptionalAction,
                    default=True)
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BdcertError as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
