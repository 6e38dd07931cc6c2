"""Command-line interface: ``fansub <command> ...``.

Exit codes: 0 success, 1 infeasible or not certified, 2 usage or input
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import certify as certify_mod
from . import convexify as convexify_mod
from . import correction, solver, system
from .configio import (ConfigError, config_from_dict, config_to_dict, datum_to_dict,
                       dumps_config, load_config, save_config, scalar_json, write_csv)
from .exactnum import format_rational, parse_rational, to_rational
from .fan_model import FanConfiguration
from .witness import BUILTINS

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("fansub")


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ inputs


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_input(args) -> FanConfiguration:
    if getattr(args, "builtin", None):
        return BUILTINS[args.builtin]()
    if not getattr(args, "config", None):
        raise UsageError("give a configuration file or --builtin")
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"{path}: no such file")
    return load_config(path)


def _load_datum(args) -> tuple:
    """Riemann datum plus the configuration it came from (None for datum-only files)."""
    if getattr(args, "builtin", None):
        cfg = BUILTINS[args.builtin]()
        return cfg.datum, cfg
    if not getattr(args, "config", None):
        raise UsageError("give a configuration/datum file or --builtin")
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"{path}: no such file")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "regions" in doc:
        cfg = config_from_dict(doc)
        return cfg.datum, cfg
    if not isinstance(doc, dict) or "riemann" not in doc:
        raise ConfigError(f"{path}: expected a configuration or an object with a 'riemann' key")
    # reuse the full parser on a one-region shell for the datum fields
    r = doc["riemann"]
    shell = {
        "n_waves": 1, "riemann": r, "speeds": ["0", "1"],
        "regions": [{k: "1" for k in ("rho", "alpha", "beta", "gamma", "delta", "C")}],
        "thermo": {"eps_minus": "0", "eps_plus": "0", "deps_minus": "1", "deps_plus": "1",
                   "eps": ["0"], "deps": ["1"]},
    }
    return config_from_dict(shell).datum, None


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _f(x) -> str:
    if x == 0:
        return "0 (exact)" if isinstance(x, Fraction) else "0"
    return f"{float(x):.6g}"


# ------------------------------------------------------------------ verify


def _verify_report(cfg: FanConfiguration, floor, tol, include_plus: bool):
    rep = system.evaluate(cfg, 0, include_plus=include_plus)
    bounds = system.bounds_check(cfg)
    res_ok = rep.max_abs_residual <= tol
    mg_ok = rep.min_margin > 0 and rep.min_margin >= floor
    bd_ok = all(ok for _, _, ok in bounds.values())
    return rep, bounds, res_ok and mg_ok and bd_ok, (res_ok, mg_ok, bd_ok)


def cmd_verify(args) -> int:
    cfg = _load_input(args)
    cfg = cfg.to_float() if args.float else cfg.to_rational()
    floor = args.margin_floor
    rep, bounds, ok, parts = _verify_report(cfg, floor, args.residual_tol, args.include_plus)
    mode = "float" if args.float else "exact"
    print(f"mode: {mode}   regions: {cfg.n}   margin floor: {format_rational(floor)}")
    print("max |residual| by interface:")
    for name, v in rep.max_residual_by_interface().items():
        print(f"  {name:<12} {_f(v)}")
    zeros = rep.zero_residuals()
    print(f"exactly zero residuals: {len(zeros)} of {len(rep.equality_residuals)}")
    print("min margin by family:")
    for fam, v in rep.min_margin_by_family().items():
        print(f"  {fam:<12} {_f(v)}")
    print(f"smallest margin: {rep.argmin_margin} = {_f(rep.min_margin)}")
    print("bounds:")
    for name, (obs, lim, passed) in bounds.items():
        print(f"  {name:<6} {_f(obs):>14} <= {format_rational(to_rational(lim)):<6} {'ok' if passed else 'FAIL'}")
    res_ok, mg_ok, bd_ok = parts
    print(f"residuals <= {args.residual_tol:g}: {res_ok}   margins: {mg_ok}   bounds: {bd_ok}")
    print("verdict:", "PASS" if ok else "FAIL")
    if args.output:
        doc = {
            "mode": mode,
            "margin_floor": format_rational(floor),
            "equality_residuals": {k: scalar_json(v) for k, v in rep.equality_residuals.items()},
            "inequality_margins": {k: scalar_json(v) for k, v in rep.inequality_margins.items()},
            "zero_residuals": zeros,
            "bounds": {k: {"observed": scalar_json(o), "limit": format_rational(to_rational(l)), "passed": p}
                       for k, (o, l, p) in bounds.items()},
            "verdict": ok,
        }
        _write(args.output, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_INFEASIBLE


# ------------------------------------------------------------------ solve / sweep


def _solve_options(args, warm=None) -> solver.SolveOptions:
    return solver.SolveOptions(
        n_waves=args.n_waves,
        target_margin=float(args.target_margin),
        max_restarts=args.restarts,
        rng_seed=args.seed,
        time_budget=args.time_budget,
        warm_start=warm,
        include_plus=args.include_plus,
        strategy=args.strategy,
    )


def _warm_start(args, source_cfg):
    if args.no_warm_start:
        return None
    if args.warm_start:
        return load_config(args.warm_start) if args.warm_start not in BUILTINS else BUILTINS[args.warm_start]()
    if source_cfg is not None and source_cfg.n == args.n_waves:
        return source_cfg
    return None


def cmd_solve(args) -> int:
    datum, src = _load_datum(args)
    opts = _solve_options(args, _warm_start(args, src))
    t = time.monotonic()
    out = solver.solve(datum, opts)
    print(f"converged: {out.converged}   score: {out.feasibility_score:.3g}   "
          f"max |residual|: {out.max_abs_residual:.3g}   min margin: {out.min_margin:.6g}   "
          f"restarts: {out.restarts_used}   {time.monotonic() - t:.1f}s")
    if args.output:
        save_config(out.config.to_rational(), args.output)
    return EXIT_OK if out.converged else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    datum, src = _load_datum(args)
    opts = _solve_options(args, _warm_start(args, src))

    def progress(s):
        log.info("sample %d: %s", s.index, "ok" if s.converged else "failed")

    rep = solver.sweep(datum, float(args.halfwidth), args.count, opts, progress=progress)
    if args.output:
        text = rep.to_json() if str(args.output).endswith(".json") else rep.to_csv()
        _write(args.output, text)
    if args.json:
        _write(args.json, rep.to_json())
    print(f"success: {rep.success_count}/{rep.count}")
    if args.min_success is not None:
        return EXIT_OK if rep.success_count >= args.min_success else EXIT_INFEASIBLE
    return EXIT_OK


def cmd_probe(args) -> int:
    datum, _ = _load_datum(args)
    opts = solver.SolveOptions(n_waves=1, max_restarts=args.restarts, rng_seed=args.seed,
                               target_margin=float(args.target_margin))
    try:
        res = solver.two_wave_probe(datum, opts)
    except solver.ProbeError as exc:
        raise UsageError(str(exc)) from None
    print(f"best score over {res.restarts} restarts: {res.best_score:.6g} "
          f"(max |residual| {res.best_max_residual:.3g}, min margin {res.best_min_margin:.3g})")
    return EXIT_OK


# ------------------------------------------------------------------ correct / certify / convexify


def cmd_correct(args) -> int:
    cfg = _load_input(args)
    try:
        fixed = correction.correct(cfg)
    except correction.CorrectionError as exc:
        print(f"correction failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    rep = system.evaluate(fixed)
    zero = rep.zero_residuals()
    print(f"exactly zero residuals: {len(zero)} of {len(rep.equality_residuals)}; "
          f"max |residual|: {_f(rep.max_abs_residual)}")
    _write(args.output, dumps_config(fixed))
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _load_input(args)
    try:
        cert = certify_mod.certify_existence(cfg, include_plus=args.include_plus)
    except certify_mod.CertificationError as exc:
        print(f"cannot certify: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"r = {format_rational(cert.r)}   A = {float(cert.A):.6g}   D2 r^2 = {float(cert.threshold):.6g}")
    print(f"|Gamma| <= {float(cert.residual_norm):.3g}   root distance <= {float(cert.root_distance):.3g}")
    failed = [k for k, v in cert.margin_survival.items() if not v]
    print(f"margin survival: {len(cert.margin_survival) - len(failed)}/{len(cert.margin_survival)} pass")
    print("verdict:", cert.verdict)
    if args.output:
        _write(args.output, cert.to_json())
    return EXIT_OK if cert.verdict else EXIT_INFEASIBLE


def _build_interpolant(cfg: FanConfiguration):
    knots = convexify_mod.knots_from_config(cfg.to_rational())
    return convexify_mod.build(knots)


def cmd_convexify(args) -> int:
    cfg = _load_input(args)
    try:
        interp = _build_interpolant(cfg)
    except convexify_mod.ConvexifyError as exc:
        print(f"convexify failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _, _, _, p, dp = convexify_mod.pressure_grid(interp, 10_000)
    lo, hi = interp.domain
    print(f"knots: {len(interp.knots)}   breakpoints: {len(interp.breakpoints)}   "
          f"domain: [{float(lo):.6g}, {float(hi):.6g}]")
    print(f"min p on grid: {p.min():.6g}   min p' on grid: {dp.min():.6g}")
    if args.output:
        _write(args.output, interp.to_json())
    if args.table:
        convexify_mod.export_pressure_table(interp, args.points, args.table)
    return EXIT_OK if p.min() > 0 and dp.min() > 0 else EXIT_INFEASIBLE


def cmd_pipeline(args) -> int:
    """solve -> correct -> certify -> convexify, one JSON bundle."""
    datum, src = _load_datum(args)
    bundle = {"datum": datum_to_dict(datum.map(to_rational))}
    if src is not None and not args.resolve:
        cfg = src
        bundle["solve"] = {"skipped": True}
    else:
        out = solver.solve(datum, _solve_options(args, _warm_start(args, src)))
        bundle["solve"] = {"converged": out.converged, "feasibility_score": out.feasibility_score,
                           "restarts_used": out.restarts_used}
        if not out.converged:
            _write(args.output, json.dumps(bundle, indent=2) + "\n")
            print("solve did not converge")
            return EXIT_INFEASIBLE
        cfg = out.config
    try:
        fixed = correction.correct(cfg)
    except correction.CorrectionError as exc:
        bundle["correct"] = {"error": str(exc)}
        _write(args.output, json.dumps(bundle, indent=2) + "\n")
        return EXIT_INFEASIBLE
    bundle["configuration"] = config_to_dict(fixed)
    rep = system.evaluate(fixed, include_plus=args.include_plus)
    bundle["verify"] = {"max_abs_residual": scalar_json(rep.max_abs_residual),
                        "min_margin": scalar_json(rep.min_margin),
                        "argmin_margin": rep.argmin_margin,
                        "zero_residuals": rep.zero_residuals()}
    ok = rep.min_margin > 0
    if fixed.n >= 2:
        cert = certify_mod.certify_existence(fixed, include_plus=args.include_plus)
        bundle["certificate"] = cert.to_dict()
        ok = ok and cert.verdict
    else:
        bundle["certificate"] = {"error": "certificate needs at least two regions"}
        ok = False
    try:
        interp = _build_interpolant(fixed)
        _, _, _, p, dp = convexify_mod.pressure_grid(interp, 10_000)
        bundle["pressure_law"] = {"interpolant": interp.to_dict(),
                                  "min_p": float(p.min()), "min_dp": float(dp.min())}
        ok = ok and p.min() > 0 and dp.min() > 0
    except convexify_mod.ConvexifyError as exc:
        bundle["pressure_law"] = {"error": str(exc)}
        ok = False
    bundle["verdict"] = bool(ok)
    _write(args.output, json.dumps(bundle, indent=2) + "\n")
    print("pipeline verdict:", bool(ok))
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_export_fan(args) -> int:
    cfg = _load_input(args)
    t = args.t
    names = ["-"] + [str(i) for i in range(1, cfg.n)] + ["+"]
    rows = [(k, names[k], float(nu), float(to_rational(nu) * t)) for k, nu in enumerate(cfg.speeds)]
    _write(args.output, write_csv(rows, ["interface", "name", "nu", "x2"]))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_input(p, datum=False):
    p.add_argument("config", nargs="?", help="configuration JSON" + (" or datum JSON" if datum else ""))
    p.add_argument("--builtin", choices=sorted(BUILTINS), help="use an embedded configuration")


def _add_solve(p):
    p.add_argument("--n-waves", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--target-margin", type=_rational_arg, default=Fraction(1, 3))
    p.add_argument("--time-budget", type=float, default=300.0)
    p.add_argument("--strategy", choices=solver.STRATEGIES, default="reduced")
    p.add_argument("--warm-start", help="configuration file or builtin name seeding the search")
    p.add_argument("--no-warm-start", action="store_true",
                   help="do not reuse the input configuration as a starting point")
    p.add_argument("--include-plus", action="store_true",
                   help="also require convexity pairs with the + state")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fansub", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="evaluate residuals, margins and bounds")
    _add_input(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="rational arithmetic (default)")
    g.add_argument("--float", action="store_true", help="binary64 arithmetic")
    p.add_argument("--margin-floor", type=_rational_arg, default=Fraction(0))
    p.add_argument("--residual-tol", type=float, default=1e-11)
    p.add_argument("--include-plus", action="store_true")
    p.add_argument("-o", "--output", help="JSON report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="search for a fan subsolution")
    _add_input(p, datum=True)
    _add_solve(p)
    p.add_argument("-o", "--output", help="configuration JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve random perturbations of a datum")
    _add_input(p, datum=True)
    _add_solve(p)
    p.add_argument("--halfwidth", type=_rational_arg, default=Fraction(1, 2))
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--min-success", type=int, help="exit 1 below this success count")
    p.add_argument("-o", "--output", help="CSV (or JSON when the name ends in .json)")
    p.add_argument("--json", help="also write the JSON report here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("probe", help="one-region search for contact data")
    _add_input(p, datum=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--target-margin", type=_rational_arg, default=Fraction(1, 3))
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("correct", help="exact correction of a float configuration")
    _add_input(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("certify", help="inverse-function-theorem existence certificate")
    _add_input(p)
    p.add_argument("--include-plus", action="store_true")
    p.add_argument("-o", "--output", help="certificate JSON")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("convexify", help="build the convex internal energy and pressure law")
    _add_input(p)
    p.add_argument("-o", "--output", help="interpolant JSON")
    p.add_argument("--table", help="pressure table CSV")
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_convexify)

    p = sub.add_parser("pipeline", help="solve, correct, certify and convexify")
    _add_input(p, datum=True)
    _add_solve(p)
    p.add_argument("--resolve", action="store_true",
                   help="solve even when the input already holds a configuration")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("export-fan", help="interface positions x2 = nu t as CSV")
    _add_input(p)
    p.add_argument("--t", type=_rational_arg, default=Fraction(1))
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_export_fan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:  # pragma: no cover
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - reported, not hidden
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
