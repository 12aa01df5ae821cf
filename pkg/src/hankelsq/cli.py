"""Command-line front end.

Exit status: 0 when every gating check passes, 1 on a gating failure,
2 on configuration, planner or I/O errors.
"""

import argparse
import json
import sys

import numpy as np

from . import specfun as sf
from .hankelop import dump_csv, nystrom_kernel, nystrom_rule, nystrom_symbol, symbol_square, sym_eigs
from .kernelzoo import KernelSpecError, kernel_dsum, kernel_value, make_kernel
from .omega import OmegaSystem, SymbolError, validate_system
from .quadrature import UnachievableTolerance
from .verify import IDENTITY_TAGS, ConfigError, GridSpec, dumps, run_suite, verify_identity, write_tables

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

INTEGER_PARAMS = {"n", "m", "p"}

FUNCTIONS = {
    "airy": ((), lambda p, x: sf.eval_airy(x)),
    "bessel_j": (("nu",), lambda p, x: sf.eval_bessel_j(p["nu"], x)),
    "macdonald_k": (("nu",), lambda p, x: sf.eval_macdonald_k(p["nu"], x)),
    "laguerre": (("n",), lambda p, x: sf.eval_laguerre_assoc(p["n"], x)),
    "hermite": (("n",), lambda p, x: sf.eval_hermite_fn(p["n"], x)),
    "whittaker": (("kappa", "nu"), lambda p, x: sf.eval_whittaker_w(p["kappa"], p["nu"], x)),
}


def _number(key, text):
    try:
        return int(text) if key in INTEGER_PARAMS else float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def _params(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key.strip()] = _number(key.strip(), val.strip())
    return out


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_eval(args):
    if args.function not in FUNCTIONS:
        raise ConfigError(f"unknown function {args.function!r}; choose from {', '.join(FUNCTIONS)}")
    needed, fn = FUNCTIONS[args.function]
    params = _params(a for a in args.args if "=" in a)
    points = [float(a) for a in args.args if "=" not in a]
    missing = [k for k in needed if k not in params]
    if missing:
        raise ConfigError(f"{args.function} needs {', '.join(k + '=' for k in missing)}")
    if not points:
        raise ConfigError("no evaluation points given")
    for x in points:
        r = fn(params, x)
        print(f"{x!r} {float(r.value)!r} {float(r.derivative)!r}")
    return EXIT_OK


def cmd_kernel(args):
    k = make_kernel(args.spec)
    xs, ys = np.broadcast_arrays(np.asarray(args.x, dtype=float), np.asarray(args.y, dtype=float))
    w = kernel_value(k, xs, ys)
    print("x y W" + (" dsum_analytic dsum_numeric" if args.dsum else ""))
    for i in range(xs.size):
        line = f"{float(xs.flat[i])!r} {float(ys.flat[i])!r} {float(np.ravel(w)[i])!r}"
        if args.dsum:
            a, n = kernel_dsum(k, xs.flat[i], ys.flat[i])
            line += f" {float(a)!r} {float(n)!r}"
        print(line)
    return EXIT_OK


def cmd_verify(args):
    grid = GridSpec.parse(args.grid) if args.grid else None
    params = _params(args.param) if args.param else None
    rep = verify_identity(args.tag, params=params, grid=grid, tol=args.tol, timing=args.timing)
    _write(dumps(rep.to_dict()), args.out)
    if args.csv:
        write_tables([rep], args.csv)
    if args.out not in (None, "-"):
        print(f"{rep.identity}: {'PASS' if rep.passed else 'FAIL'} max_rel_residual={rep.max_rel_residual:.3g}")
    return EXIT_OK if rep.passed or not rep.gating else EXIT_FAIL


def cmd_spectrum(args):
    k = make_kernel(args.spec)
    rule = nystrom_rule(k, args.nodes)
    w_op = nystrom_kernel(k, rule)
    w = sym_eigs(w_op)
    g = None
    if k.factorizable:
        g_op = nystrom_symbol(k.symbol, rule) if k.symbol.scalar else symbol_square(k.symbol, rule)
        g = sym_eigs(g_op)
    label = "gamma" if g is not None and k.symbol.scalar else "gamma_star_gamma"
    print("index,W" + (f",{label}" if g is not None else ""))
    for i, lam in enumerate(w.eigenvalues):
        row = f"{i},{float(lam)!r}"
        if g is not None:
            row += f",{float(g.eigenvalues[i])!r}"
        print(row)
    if args.dump:
        dump_csv(args.dump, w_op, w, rule)
        if g is not None:
            dump_csv(args.dump + "_symbol", g_op, g)
    return EXIT_OK


def cmd_suite(args):
    overrides = {"only": args.only.split(",") if args.only else None, "timing": args.timing or None}
    if args.tol:
        overrides["tolerances"] = {k.upper(): v for k, v in _tol_overrides(args.tol).items()}
    summary, reports, code = run_suite(dict(path=args.config, **overrides))
    _write(dumps(summary), args.out)
    if args.csv:
        write_tables(reports, args.csv)
    if args.out not in (None, "-"):
        for r in reports:
            flag = "PASS" if r.passed else "FAIL"
            kind = "gating" if r.gating else "diagnostic"
            print(f"{flag} {r.identity} ({kind}) max_rel_residual={r.max_rel_residual:.3g}")
    return code


def _tol_overrides(items):
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"expected TAG=tolerance, got {item!r}")
        out[key.strip()] = _number(key, val)
    return out


def cmd_system(args):
    with open(args.file) as fh:
        system = OmegaSystem.from_json(fh.read())
    rec = validate_system(system)
    print(json.dumps({
        "flavor": system.flavor,
        "n": system.n,
        "symmetry_defect": rec.symmetry_defect,
        "min_eigenvalues": rec.min_eigenvalues,
        "messages": list(rec.messages),
        "passed": rec.passed,
    }, indent=2))
    return EXIT_OK if rec.passed else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="hankelsq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="special-function values: one 'x value derivative' line per point")
    e.add_argument("function", help=", ".join(FUNCTIONS))
    e.add_argument("args", nargs="+", metavar="ARG", help="key=value parameters and evaluation points")
    e.set_defaults(func=cmd_eval)

    k = sub.add_parser("kernel", help="kernel values W(x, y)")
    k.add_argument("spec", help="e.g. airy:s=0 or whittaker:kappa=-0.5,nu=0.25")
    k.add_argument("--x", type=float, nargs="+", required=True)
    k.add_argument("--y", type=float, nargs="+", required=True)
    k.add_argument("--dsum", action="store_true", help="also print the diagonal derivative both ways")
    k.set_defaults(func=cmd_kernel)

    v = sub.add_parser("verify", help="check one identity on a grid")
    v.add_argument("tag", help=", ".join(IDENTITY_TAGS))
    v.add_argument("--param", action="append", metavar="K=V")
    v.add_argument("--grid", metavar="A,B,N")
    v.add_argument("--tol", type=float)
    v.add_argument("--out", metavar="FILE", help="JSON report (default stdout)")
    v.add_argument("--csv", metavar="DIR", help="directory for the residual table")
    v.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical output)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spectrum", help="Nystrom eigenvalues of W and of its symbol")
    s.add_argument("spec")
    s.add_argument("--nodes", type=int, default=100)
    s.add_argument("--dump", metavar="PREFIX", help="write rule, matrices and eigenvalues as CSV")
    s.set_defaults(func=cmd_spectrum)

    u = sub.add_parser("suite", help="run every check; exit 0 iff all gating checks pass")
    u.add_argument("--only", metavar="TAG,...", help="case-insensitive substring filter on check names")
    u.add_argument("--out", metavar="FILE", help="JSON report (default stdout)")
    u.add_argument("--csv", metavar="DIR")
    u.add_argument("--config", metavar="FILE", help='JSON: {"only": [...], "tolerances": {TAG: tol}}')
    u.add_argument("--tol", action="append", metavar="TAG=TOL")
    u.add_argument("--timing", action="store_true")
    u.set_defaults(func=cmd_suite)

    y = sub.add_parser("system", help="validate an Omega system given as JSON")
    y.add_argument("file")
    y.set_defaults(func=cmd_system)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnachievableTolerance as exc:
        print(f"error: unachievable tolerance: {exc}", file=sys.stderr)
    except (ConfigError, KernelSpecError, SymbolError, sf.DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
