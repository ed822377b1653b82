"""Command-line front end.

Exit codes: 0 verified, 1 falsified (residual in the report), 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .calculus import OrderBound
from .determining import classify
from .equation import Constant, EquationSpec, Exponential, Linear, Power, Symbolic, critical_power
from .grammar import ParseError, parse
from .jet import UnsupportedExpression
from .noether import first_integral_catalog, is_conserved, noether_check, synthesized_integrals
from .numerics import (
    DomainError,
    SolutionFamily,
    default_tol,
    drift,
    eval_family,
    integrate,
)
from .symmetry import PointTransformation, VectorField, apply_transformation, catalog, invariance_check

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _number(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected a rational number, got {text!r}") from None


def _coef(name: str, value: str | None):
    if value is None or value == "sym":
        return name
    return _number(value)


def parse_fspec(text: str):
    """power:p=<rat>,lambda=<sym|num> | exp:alpha=..,lambda=.. | const | linear | expr:<jet_expr>."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind == "expr":
        return Symbolic(parse(rest))
    opts = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"malformed option {item!r} in f-spec {text!r}")
        opts[key.strip()] = value.strip()
    allowed = {"power": {"p", "lambda"}, "exp": {"alpha", "lambda"}, "const": {"lambda"}, "linear": {"lambda"}}
    if kind not in allowed:
        raise UsageError(f"unknown f-spec kind {kind!r}; expected power, exp, const, linear or expr")
    extra = set(opts) - allowed[kind]
    if extra:
        raise UsageError(f"unknown option(s) {sorted(extra)} for {kind}")
    lam = _coef("lambda", opts.get("lambda"))
    if kind == "power":
        if "p" not in opts:
            raise UsageError("power f-spec needs p=<rational>")
        return Power(_number(opts["p"]), lam)
    if kind == "exp":
        return Exponential(_coef("alpha", opts.get("alpha")), lam)
    return Constant(lam) if kind == "const" else Linear(lam)


def _generator(text: str, eq: EquationSpec) -> VectorField:
    if "=" in text:
        return VectorField.from_text(text, "custom")
    for vf in catalog(eq):
        if vf.label == text:
            return vf
    labels = ", ".join(vf.label for vf in catalog(eq))
    raise UsageError(f"no generator {text!r} for this equation; available: {labels}")


def _bound(args):
    return OrderBound(args.max_order) if args.max_order is not None else None


# --------------------------------------------------------------------------
# subcommands return (exit code, report dict, text lines)


def cmd_classify(args):
    eq = EquationSpec(args.n, parse_fspec(args.f))
    gens = catalog(eq)
    result = classify(eq)
    failures = [vf.label for vf in gens + result.basis if not invariance_check(vf, eq)]
    ok = not failures and result.dimension == _catalog_dimension(eq, gens)
    report = {
        "equation": eq.describe(),
        "case": result.case,
        "dimension": result.dimension,
        "generators": [vf.to_json() for vf in gens],
        "solver": result.to_json()["generators"],
        "method": result.method,
        "verified": ok,
    }
    if failures:
        report["failures"] = failures
    lines = [f"{eq.describe()}: {result.case}, dimension {result.dimension}"]
    lines += [f"  {vf.label}: {vf.to_text()}" for vf in gens]
    lines.append("verified" if ok else f"FAILED {failures}")
    return (EXIT_OK if ok else EXIT_FALSIFIED), report, lines


def _catalog_dimension(eq, gens):
    from .symmetry import symmetry_dimension

    return symmetry_dimension(eq, gens)


def cmd_check_symmetry(args):
    eq = EquationSpec(args.n, parse_fspec(args.f))
    vf = _generator(args.generator, eq)
    res = invariance_check(vf, eq)
    report = {"equation": eq.describe(), "generator": vf.to_json(), "holds": res.holds, "residual": str(res.residual)}
    lines = [f"{vf.to_text()}: {'symmetry' if res.holds else 'not a symmetry'}"]
    if not res.holds:
        lines.append(f"  residual: {res.residual}")
    return (EXIT_OK if res.holds else EXIT_FALSIFIED), report, lines


def cmd_noether(args):
    eq = EquationSpec(args.n, parse_fspec(args.f))
    vf = _generator(args.generator, eq)
    verdict = noether_check(vf, eq, _bound(args))
    report = {"equation": eq.describe(), "generator": vf.to_json(), **verdict.to_json()}
    line = f"{vf.label}: {verdict.kind}"
    if verdict.gauge is not None:
        line += f" (gauge {verdict.gauge})"
    lines = [line]
    if verdict.residual is not None:
        lines.append(f"  residual: {verdict.residual}")
    return (EXIT_OK if verdict.is_noether else EXIT_FALSIFIED), report, lines


def cmd_first_integrals(args):
    n = args.n
    lam = _coef("lambda", args.lam)
    eq = EquationSpec(n, Power(critical_power(n), lam))
    closed = first_integral_catalog(n, lam)
    synth = synthesized_integrals(n, lam)
    report, lines, ok = {"equation": eq.describe(), "integrals": {}}, [eq.describe()], True
    for name in ("I1", "I2", "I3"):
        I = closed[name]
        agrees = synth[name].expr == I.expr
        conserved = is_conserved(I, eq)
        ok &= agrees and conserved
        entry = {"expr": str(I.expr), "source": I.source, "matches_synthesis": agrees, "conserved": conserved}
        if I.gauge is not None:
            entry["gauge"] = str(I.gauge)
        report["integrals"][name] = entry
        lines.append(f"  {name} = {I.expr}")
    report["verified"] = ok
    return (EXIT_OK if ok else EXIT_FALSIFIED), report, lines


def _family(args) -> SolutionFamily:
    return SolutionFamily(args.n, float(_number(args.lam)), float(args.alpha), float(args.beta), float(args.gamma))


def _tol(args) -> float:
    return default_tol() if args.tol is None else args.tol


def cmd_solve(args):
    if args.lam in (None, "sym"):
        raise UsageError("solve needs a numeric --lambda")
    fam = _family(args)
    eq = fam.equation()
    x0, x1 = args.span
    traj = integrate(eq, eval_family(fam, x0, 2 * fam.n - 1), (x0, x1), _tol(args))
    err = max(abs(row[0] - eval_family(fam, x, 0)[0]) for x, row in zip(traj.xs, traj.states))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(traj.to_csv())
    report = {
        "family": fam.to_json(),
        "status": traj.status,
        "samples": len(traj),
        "span": [float(traj.xs[0]), float(traj.xs[-1])],
        "max_error": err,
        "max_step_error": float(np.max(traj.errors)),
    }
    if traj.message:
        report["message"] = traj.message
        print(f"lieode: {traj.message}", file=sys.stderr)
    lines = [f"{eq.describe()}  A = {fam.amp:.15g}", f"  {len(traj)} samples, status {traj.status}, max |y - exact| = {err:.3e}"]
    return (EXIT_OK if traj.complete else EXIT_FALSIFIED), report, lines


def cmd_drift(args):
    if args.lam in (None, "sym"):
        raise UsageError("drift needs a numeric --lambda")
    n = args.n
    lam = _number(args.lam)
    x0, x1 = args.span
    if args.family:
        fam = SolutionFamily(n, float(lam), *map(float, args.family))
        ics = eval_family(fam, x0, 2 * n - 1)
    elif args.ics:
        ics = [float(v) for v in args.ics]
    else:
        raise UsageError("drift needs --family ALPHA BETA GAMMA or --ics")
    eq = EquationSpec(n, Power(critical_power(n), lam))
    traj = integrate(eq, ics, (x0, x1), _tol(args))
    ints = first_integral_catalog(n, lam)
    names = sorted(ints) if args.integral == "all" else [args.integral]
    drifts = {name: drift(traj, ints[name]) for name in names}
    ok = traj.complete and all(d < args.threshold for d in drifts.values())
    report = {
        "n": n,
        "status": traj.status,
        "samples": len(traj),
        "span": [float(traj.xs[0]), float(traj.xs[-1])],
        "drift": drifts,
        "threshold": args.threshold,
        "verified": ok,
    }
    if traj.message:
        report["message"] = traj.message
        print(f"lieode: {traj.message}", file=sys.stderr)
    lines = [f"{name}: drift {d:.3e}" for name, d in drifts.items()]
    return (EXIT_OK if ok else EXIT_FALSIFIED), report, lines


def _points(text: str) -> list:
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise UsageError(f"expected 'x,y' pairs separated by ';', got {chunk!r}")
        out.append((float(_number(parts[0])), float(_number(parts[1]))))
    return out


def cmd_transform(args):
    t = PointTransformation(args.kind, float(args.epsilon), args.n)
    mapped = apply_transformation(t, _points(args.points))
    report = {"kind": t.kind, "epsilon": t.epsilon, "n": t.n, "points": [list(p) for p in mapped]}
    lines = [f"({x:.15g}, {y:.15g})" for x, y in mapped]
    return EXIT_OK, report, lines


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-order", type=int, default=None, help="override the jet order bound")

    ap = argparse.ArgumentParser(prog="lieode", description="Symmetry analysis of y^(2n) + f(y) = 0.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        p.add_argument("--n", type=int, required=True)
        return p

    p = add("classify", cmd_classify, "symmetry generators and dimension")
    p.add_argument("--f", required=True, help="power:p=..,lambda=.. | exp:alpha=.. | const | linear | expr:...")
    p = add("check-symmetry", cmd_check_symmetry, "test one generator for invariance")
    p.add_argument("--f", required=True)
    p.add_argument("--generator", required=True, help="catalog label or 'xi=...;eta=...'")
    p = add("noether", cmd_noether, "Noether gate for one generator")
    p.add_argument("--f", required=True)
    p.add_argument("--generator", required=True)
    p = add("first-integrals", cmd_first_integrals, "closed-form integrals at the critical power")
    p.add_argument("--lambda", dest="lam", default="sym")

    num = argparse.ArgumentParser(add_help=False)
    num.add_argument("--lambda", dest="lam", default=None)
    num.add_argument("--span", type=float, nargs=2, required=True, metavar=("X0", "X1"))
    num.add_argument("--tol", type=float, default=None, help="integrator tolerance (default LIEODE_TOL or 1e-10)")

    p = sub.add_parser("solve", parents=[common, num], help="integrate from an exact family member")
    p.set_defaults(fn=cmd_solve)
    p.add_argument("--n", type=int, required=True)
    for name in ("alpha", "beta", "gamma"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--csv", help="write the trajectory to this CSV file")

    p = sub.add_parser("drift", parents=[common, num], help="first-integral drift along an integrated trajectory")
    p.set_defaults(fn=cmd_drift)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", nargs=3, metavar=("ALPHA", "BETA", "GAMMA"))
    p.add_argument("--ics", nargs="+")
    p.add_argument("--integral", choices=("I1", "I2", "I3", "all"), default="all")
    p.add_argument("--threshold", type=float, default=1e-6)

    p = add("transform", cmd_transform, "apply a one-parameter group to points")
    p.add_argument("--kind", choices=("translation", "scaling", "projective"), required=True)
    p.add_argument("--epsilon", required=True, type=lambda s: float(_number(s)))
    p.add_argument("--points", required=True, help="'x,y;x,y;...'")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_order is not None and args.max_order < 0:
        print("lieode: --max-order must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        code, report, lines = args.fn(args)
    except ParseError as exc:
        print(f"lieode: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DomainError, UnsupportedExpression, ValueError, ZeroDivisionError) as exc:
        print(f"lieode: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
