"""Command-line front end.

Subcommands:
    build-triangular          write the flat-folded optimal band
    build-wrinkle             write a wrinkle band for a given epsilon
    validate                  isometry/foliation validation of a band file
    tpattern                  locate and report the T-pattern of a band
    verify                    run the effective-bound verifiers
    bounds-sweep              grid certificates and random property sweeps
    sharpness-sweep           Hausdorff-vs-epsilon table for wrinkle bands

Exit codes: 0 = pass, 1 = verification failure, 2 = structural error or
bad usage.  All randomness sits behind --seed; identical arguments and
seed produce byte-identical CSV output.  The MOEBIUS_TOL environment
variable may hold a JSON object overriding ToleranceConfig fields, e.g.
MOEBIUS_TOL='{"isometry": 1e-8}'.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bounds
from .band import build_triangular, build_wrinkle, read_json, validate, write_json
from .flatmodel import SQRT3
from .geom import DEFAULT_TOL, StructureError, ToleranceConfig
from .tpattern import NoTPatternError, find_tpattern, normalize_pose, unfold
from .verify import (
    OutOfScopeError,
    prepare,
    verify_corollary,
    verify_eff,
    verify_eff2,
    write_csv_summary,
    write_report_json,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2
DEFAULT_SEED = 1234


def _tolerances(args) -> ToleranceConfig:
    tol = DEFAULT_TOL
    env = os.environ.get("MOEBIUS_TOL")
    if env:
        try:
            overrides = json.loads(env)
            tol = tol.replace(**overrides)
        except (ValueError, TypeError) as exc:
            raise StructureError(f"bad MOEBIUS_TOL: {exc}") from exc
    if getattr(args, "eta", None) is not None:
        if not (1e-6 <= args.eta <= 1e-2):
            raise StructureError("eta must lie in [1e-6, 1e-2]")
        tol = tol.replace(sampling_eta=args.eta)
    return tol


def _cmd_build_triangular(args) -> int:
    band = build_triangular(n_per_fan=args.bends_per_fan)
    write_json(band, args.output)
    print(f"wrote triangular band ({band.n_bends} bends, lambda={band.lam:.12f}) "
          f"to {args.output}")
    return EXIT_PASS


def _cmd_build_wrinkle(args) -> int:
    if not (0.0 < args.epsilon <= 1e-2):
        raise StructureError("epsilon must lie in (0, 1e-2]")
    band = build_wrinkle(args.epsilon)
    write_json(band, args.output)
    meta = band.meta
    print(f"wrote wrinkle band eps={args.epsilon:g} "
          f"(lambda-sqrt3={meta['eps_excess']:.6e}, coeff={meta['excess_coeff']:.4f}, "
          f"crack height={meta['crack_height']:.6e}) to {args.output}")
    return EXIT_PASS


def _cmd_validate(args) -> int:
    tol = _tolerances(args)
    band = read_json(args.input)
    rep = validate(band, tol)
    print(f"validate {args.input}: pass={rep.passed} "
          f"ruling={rep.max_ruling_residual:.3e} boundary={rep.max_boundary_residual:.3e} "
          f"foliation_violations={rep.foliation_violations}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _cmd_tpattern(args) -> int:
    tol = _tolerances(args)
    band = read_json(args.input)
    tp = find_tpattern(band, tol)
    moved, tpm = normalize_pose(band, tp)
    trap = unfold(moved, tpm)
    print(f"tpattern {args.input}: params=({tp.param_t:.6f}, {tp.param_b:.6f}) "
          f"len_T={tp.len_t:.9f} len_B={tp.len_b:.9f}")
    print(f"  residuals: perp={tp.residual_perp:.3e} offset={tp.residual_offset:.3e} "
          f"alternates={len(tp.alternates)}")
    print(f"  unfolded: t={trap.t:.12f} len_H={trap.len_h():.9f} len_D={trap.len_d():.9f}")
    return EXIT_PASS


def _cmd_verify(args) -> int:
    tol = _tolerances(args)
    band = read_json(args.input)
    rep = validate(band, tol)
    if not rep.passed:
        print(f"validation failed: ruling={rep.max_ruling_residual:.3e} "
              f"boundary={rep.max_boundary_residual:.3e} "
              f"violations={rep.foliation_violations}")
        return EXIT_FAIL
    state = prepare(band, tol)
    which = args.theorem or "all"
    reports = []
    if which in ("eff", "all"):
        reports.append(verify_eff(band, tol, state=state))
    if which in ("eff2", "all"):
        reports.append(verify_eff2(band, tol, state=state))
    if which in ("corollary", "all"):
        if band.lam - SQRT3 < 1.0 / 384.0:
            reports.append(verify_corollary(band, tol, state=state))
        elif which == "corollary":
            raise OutOfScopeError("out of theorem scope: eps >= 1/384")
    for r in reports:
        keys = ("deviation", "containment_max", "hausdorff")
        shown = {k: f"{v:.6e}" for k, v in r.measured.items() if k in keys}
        print(f"{r.name}: pass={r.passed} eps={r.epsilon:.6e} {shown}")
    if args.report:
        write_report_json(reports, args.report)
    if args.csv:
        write_csv_summary(reports, args.csv)
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _cmd_bounds_sweep(args) -> int:
    rng = np.random.default_rng(args.seed)
    n = args.grid
    lines = []

    anchors_ok = (
        abs(bounds.h(1.0 / SQRT3) - SQRT3) < 1e-12
        and abs(bounds.d(1.0 / SQRT3) - SQRT3) < 1e-12
        and abs(bounds.g(1.0) - SQRT3) < 1e-12
    )
    lines.append(("anchor-identities", anchors_ok))

    deriv = bounds.derivative_anchors()
    lines.append(
        ("derivative-anchors",
         deriv["h_prime_err"] < 1e-6 and deriv["d_prime_err"] < 1e-6
         and deriv["fprime_below_3_4"])
    )

    cert = bounds.hd_grid_certificate(max(n * n, 10_000))
    lines.append(
        ("aspect-grid",
         cert["min_above_sqrt3"] and cert["argmin_near_t_opt"]
         and cert["h_increasing"] and cert["d_decreasing"])
    )

    sq = bounds.sq_grid_certificate(max(int(math.isqrt(n * 10)), 100))
    lines.append(("sqrt-margins-grid",
                  sq["sq0_nonnegative"] and sq["sq0_zero_only_at_corner"]
                  and sq["sq1_strictly_positive"]))

    draws = max(n, 500)
    ok = 0
    for _ in range(draws):
        eps = float(rng.uniform(0.001, 0.24))
        tri = bounds.random_perturbed_triangle(rng, eps)
        r = bounds.offset1_check(tri, eps)
        ok += r.hypotheses_ok and r.passed
    lines.append((f"offset-sweep[{draws}]", ok == draws))

    ok = 0
    for _ in range(draws):
        eps = float(rng.uniform(0.001, 0.1))
        cg = bounds.curve_with_forced_deviation(rng, eps)
        ok += (bounds.wiggle_check(cg, eps).passed and bounds.graph_check(cg).passed)
    lines.append((f"curve-sweep[{draws}]", ok == draws))

    all_ok = True
    for name, passed in lines:
        print(f"{name}: {'pass' if passed else 'FAIL'}")
        all_ok = all_ok and passed
    return EXIT_PASS if all_ok else EXIT_FAIL


def _cmd_sharpness_sweep(args) -> int:
    tol = _tolerances(args)
    eps_list = sorted(float(e) for e in args.epsilons.split(","))
    if not eps_list or any(not (0.0 < e <= 1e-2) for e in eps_list):
        raise StructureError("epsilons must lie in (0, 1e-2]")
    rows = []
    for eps in eps_list:
        band = build_wrinkle(eps)
        state = prepare(band, tol)
        rep = verify_corollary(band, tol, state=state)
        rows.append((eps, band.lam, rep.measured["hausdorff"],
                     rep.measured["ratio_to_sqrt_eps"], rep.passed))
    out = args.output
    lines = ["epsilon,lambda,hausdorff,ratio_to_sqrt_eps"]
    for eps, lam, hd, ratio, _ in rows:
        lines.append(f"{eps:.17g},{lam:.17g},{hd:.17g},{ratio:.17g}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if len(rows) >= 2:
        le = np.log([r[0] for r in rows])
        lh = np.log([r[2] for r in rows])
        slope = float(np.polyfit(le, lh, 1)[0])
        print(f"# log-log slope: {slope:.4f}", file=sys.stderr)
    return EXIT_PASS if all(r[4] for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moebius-band",
        description="Build, validate and verify discrete paper Moebius bands.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-triangular", help="write the flat-folded optimal band")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bends-per-fan", type=int, default=48)
    p.set_defaults(func=_cmd_build_triangular)

    p = sub.add_parser("build-wrinkle", help="write a wrinkle band")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_build_wrinkle)

    p = sub.add_parser("validate", help="validate a band file")
    p.add_argument("--input", required=True)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("tpattern", help="locate the T-pattern of a band")
    p.add_argument("--input", required=True)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=_cmd_tpattern)

    p = sub.add_parser("verify", help="run the effective-bound verifiers")
    p.add_argument("--input", required=True)
    p.add_argument("--theorem", choices=["eff", "eff2", "corollary"], default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--report", default=None, help="write a JSON report")
    p.add_argument("--csv", default=None, help="write a CSV summary")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bounds-sweep", help="grid certificates and property sweeps")
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=_cmd_bounds_sweep)

    p = sub.add_parser("sharpness-sweep", help="Hausdorff-vs-epsilon table")
    p.add_argument("--epsilons", required=True, help="comma-separated list")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=_cmd_sharpness_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_PASS
    try:
        return args.func(args)
    except NoTPatternError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OutOfScopeError, StructureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
