"""``mms`` command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 unreadable or invalid
input, 3 inputs that belong to different spaces.  Every input is parsed and
validated before any computation starts, and outputs are written
atomically, so a failing command leaves no files behind.  ``MMS_LOG`` sets
the log level (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import io
from . import verify as vf
from .curves import (CurveError, constant_curve, dilation_curve, mixture_path, translation_curve,
                     validate_curve)
from .functionals import (MeasureFunctional, lp_norm_functional_bruteforce,
                          lp_norm_functional_search, lp_norm_point)
from .gradients import EnsembleFactory, euclidean_compare
from .io import ParseError, SpaceMismatch
from .measures import MeasureError
from .mmetric import HFunction, dm_solve, w1
from .space import SpaceError

log = logging.getLogger("mms")

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_MISMATCH = 0, 1, 2, 3


def _int_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_space(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--space", help="space JSON file {dist, weight, coords?}")
    g.add_argument("--grid", help='grid "dim,extent_1,...,extent_dim,delta"')
    p.add_argument("--origin", help="grid origin, e.g. -1,-1 (default 0)")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mms", description="Mass-transport metric toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dm", help="d_M between two measures")
    _add_space(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--h-exp", type=float, default=2.0, help="exponent s of h(eps) = eps**s")
    p.add_argument("--plan", action="store_true", help="include the optimal plan")
    _add_out(p)

    p = sub.add_parser("w1", help="Wasserstein-1 distance between equal-mass measures")
    _add_space(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--normalize", action="store_true", help="rescale both to unit mass first")
    _add_out(p)

    p = sub.add_parser("curve", help="generate or validate curves of measures")
    csub = p.add_subparsers(dest="action", required=True)
    g = csub.add_parser("gen")
    g.add_argument("kind", choices=["constant", "translation", "dilation", "mixture"])
    _add_space(g)
    g.add_argument("--measure", help="start measure (constant, translation, mixture)")
    g.add_argument("--target", help="end measure (mixture)")
    g.add_argument("--direction", type=_int_list, default=None, help="lattice vector, e.g. 1,0")
    g.add_argument("--center", type=int, help="centre point index (dilation)")
    g.add_argument("--radius", type=float, help="start radius (dilation)")
    g.add_argument("--steps", type=int, default=4)
    g.add_argument("--h-exp", type=float, default=2.0)
    _add_out(g)
    v = csub.add_parser("validate")
    _add_space(v)
    v.add_argument("curve")
    v.add_argument("--h-exp", type=float, default=2.0)
    _add_out(v)

    p = sub.add_parser("norm", help="L^p norm of the mean-value functional of f")
    _add_space(p)
    p.add_argument("f", help="point function JSON {values}")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--budget", type=int, default=32, help="search budget above 6 points")
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)

    p = sub.add_parser("grad", help="upper-gradient field of f on a grid")
    _add_space(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--f", dest="f", help="point function JSON {values}")
    src.add_argument("--expr", help="numpy expression in x (and y, z), e.g. 'sin(x)'")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--rho", type=float, default=None, help="probe radius (default 2*delta)")
    p.add_argument("--scales", type=_int_list, default=[1, 2, 4], help="scales in steps")
    p.add_argument("--estimate", choices=["richardson", "sup"], default="richardson")
    p.add_argument("--directions", choices=["lattice", "axis"], default="lattice")
    p.add_argument("--csv", help="write the per-point comparison CSV here")
    _add_out(p)

    p = sub.add_parser("verify", help="run the randomized invariant suites")
    p.add_argument("suite", choices=list(vf.SUITES) + ["all"])
    p.add_argument("--n", type=int, default=50, help="instances per suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--space", help="also check this space file's metric axioms")
    _add_out(p)
    return parser


def _load_space(args):
    if args.grid:
        return io.parse_grid(args.grid, args.origin)
    return io.load_space(args.space)


def _emit(args, payload: dict) -> None:
    text = io.dumps(payload)
    if getattr(args, "out", None):
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _h(args) -> HFunction:
    if args.h_exp <= 1:
        raise ParseError("--h-exp must exceed 1")
    return HFunction(args.h_exp)


def cmd_dm(args) -> int:
    h = _h(args)
    space = _load_space(args)
    a, b = io.load_measure(args.a, space), io.load_measure(args.b, space)
    res = dm_solve(a, b, h)
    _emit(args, res.as_dict(with_plan=args.plan))
    return EXIT_OK


def cmd_w1(args) -> int:
    space = _load_space(args)
    a, b = io.load_measure(args.a, space), io.load_measure(args.b, space)
    try:
        value = w1(a, b, normalize=args.normalize)
    except MeasureError as exc:
        raise ParseError(str(exc)) from exc
    _emit(args, {"w1": value})
    return EXIT_OK


def _verdict(curve) -> dict:
    return {
        "rectifiable": curve.rectifiable,
        "lip_cert": curve.lip_cert,
        "mass_constant": curve.mass_constant(),
        "support_drift_ok": curve.support_drift_ok(),
    }


def cmd_curve(args) -> int:
    h = _h(args)
    space = _load_space(args)
    if args.action == "validate":
        states, times, stated = io.load_curve_data(args.curve, space)
        curve = validate_curve(states, times, h, label="input")
        out = _verdict(curve)
        out["stated_lip_cert"] = stated
        out["certificate_ok"] = stated is None or curve.lip_cert <= stated + 1e-9
        _emit(args, out)
        return EXIT_OK if out["certificate_ok"] else EXIT_FAIL

    need = {"constant": ["measure"], "translation": ["measure", "direction"],
            "dilation": ["center", "radius"], "mixture": ["measure", "target"]}[args.kind]
    missing = [k for k in need if getattr(args, k) is None]
    if missing:
        raise ParseError(f"curve gen {args.kind} needs --{', --'.join(missing)}")
    if args.steps < 1:
        raise ParseError("--steps must be positive")
    start = io.load_measure(args.measure, space) if args.measure else None
    if args.kind == "constant":
        curve = constant_curve(start, args.steps, space.spacing or 1.0)
    elif args.kind == "translation":
        curve = translation_curve(space, start, args.direction, args.steps, h)
    elif args.kind == "dilation":
        if not 0 <= args.center < space.n:
            raise ParseError("--center out of range")
        curve = dilation_curve(space, args.center, args.radius, args.steps, h)
    else:
        target = io.load_measure(args.target, space)
        states = mixture_path(start, target, args.steps)
        curve = validate_curve(states, np.linspace(0, 1, args.steps + 1), h, label="mixture")
    out = io.curve_dict(curve)
    out["verdict"] = _verdict(curve)
    _emit(args, out)
    return EXIT_OK


def cmd_norm(args) -> int:
    if args.p < 1:
        raise ParseError("--p must be at least 1")
    space = _load_space(args)
    f = io.load_point_function(args.f, space)
    F = MeasureFunctional.induced(f)
    if space.n <= 6:
        res = lp_norm_functional_bruteforce(F, args.p, space, detail=True)
    else:
        res = lp_norm_functional_search(F, args.p, space, args.budget, args.seed, detail=True)
    out = res.as_dict()
    out["point_norm"] = lp_norm_point(f, args.p, space.weight)
    _emit(args, out)
    return EXIT_OK


def _eval_expr(expr: str, space) -> np.ndarray:
    if space.coords is None:
        raise ParseError("--expr needs a space with coordinates")
    env = {k: getattr(np, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pi",
                                       "minimum", "maximum", "tanh", "arctan")}
    for name, col in zip("xyz", space.coords.T):
        env[name] = col
    try:
        with np.errstate(all="ignore"):
            vals = eval(expr, {"__builtins__": {}}, env)  # noqa: S307 - restricted namespace
    except Exception as exc:
        raise ParseError(f"cannot evaluate {expr!r}: {exc}") from exc
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (space.n,)).copy()
    if not np.all(np.isfinite(vals)):
        raise ParseError(f"{expr!r} is not finite on the grid")
    return vals


def cmd_grad(args) -> int:
    if args.p < 1:
        raise ParseError("--p must be at least 1")
    space = _load_space(args)
    if not space.is_grid:
        raise SpaceMismatch("gradient fields need a grid space (--grid)")
    vals = _eval_expr(args.expr, space) if args.expr else io.load_point_function(args.f, space).values
    rho = 2 * space.spacing if args.rho is None else args.rho
    if rho < space.spacing:
        raise ParseError("--rho must be at least the grid spacing")
    if args.estimate == "richardson" and (len(args.scales) < 2 or args.scales[1] != 2 * args.scales[0]):
        raise ParseError("richardson needs scales s,2s,...")
    factory = EnsembleFactory(space, rho, args.scales, directions=args.directions)
    rep = euclidean_compare(vals, space, args.p, rho, args.estimate, args.scales, factory)
    out = rep.field.as_dict()
    out["report"] = rep.as_dict()
    text, csv = io.dumps(out), rep.csv()
    # write both outputs only after everything has been computed
    if args.csv:
        io.write_atomic(args.csv, csv)
    if args.out:
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    injected = io.load_space_raw(args.space) if args.space else None
    suites = vf.SUITES if args.suite == "all" else (args.suite,)
    if args.n <= 0:
        raise vf.EmptySuiteError("no instances requested (--n must be positive)")
    report = vf.run(suites, args.n, args.seed, max(1, args.jobs), injected)
    _emit(args, report)
    return EXIT_OK if report["passed"] else EXIT_FAIL


COMMANDS = {"dm": cmd_dm, "w1": cmd_w1, "curve": cmd_curve, "norm": cmd_norm,
            "grad": cmd_grad, "verify": cmd_verify}


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("MMS_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SpaceMismatch as exc:
        print(f"mms: space mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ParseError, SpaceError, MeasureError, CurveError, vf.EmptySuiteError) as exc:
        print(f"mms: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
