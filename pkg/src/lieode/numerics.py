"""Numeric layer: the exact critical-power family, an adaptive integrator, drift."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .equation import EquationSpec, Power, critical_power
from .jet import JetExpr
from .symmetry import PointTransformation, apply_transformation

__all__ = [
    "DomainError",
    "SolutionFamily",
    "Trajectory",
    "amplitude",
    "eval_family",
    "integrate",
    "drift",
    "drift_report",
    "evaluate_along",
    "fit_family",
    "closure_residual",
    "default_tol",
]

DEFAULT_TOL = 1e-10
Y_FLOOR = 1e-8


class DomainError(ValueError):
    """Parameters or sample points outside the region where a formula is real and finite."""


def default_tol() -> float:
    raw = os.environ.get("LIEODE_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise DomainError(f"LIEODE_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise DomainError(f"LIEODE_TOL must be positive, got {raw!r}")
    return tol


# --------------------------------------------------------------------------
# exact family y = A_n (alpha + 2 beta x + gamma x^2)^((2n-1)/2)


def _sign_quantity(n, lam, alpha, beta, gamma) -> float:
    disc = beta * beta - alpha * gamma
    if disc == 0:
        raise DomainError("beta^2 - alpha*gamma must be nonzero")
    return (-1) ** (n + 1) * lam / disc**n


def amplitude(n: int, lam: float, alpha: float, beta: float, gamma: float) -> float:
    q = _sign_quantity(n, lam, alpha, beta, gamma)
    if q <= 0:
        raise DomainError(f"(-1)^(n+1) lambda / (beta^2 - alpha gamma)^n = {q} is not positive")
    c = (2**n * factorial(n) / factorial(2 * n)) ** 2
    return (q * c) ** ((2 * n - 1) / (4 * n))


@dataclass(frozen=True)
class SolutionFamily:
    n: int
    lam: float
    alpha: float
    beta: float
    gamma: float
    amp: float = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")
        object.__setattr__(self, "amp", amplitude(self.n, self.lam, self.alpha, self.beta, self.gamma))

    @property
    def exponent(self) -> float:
        return (2 * self.n - 1) / 2

    def quadratic(self, x: float) -> float:
        return self.alpha + 2 * self.beta * x + self.gamma * x * x

    def equation(self) -> EquationSpec:
        lam = Fraction(self.lam).limit_denominator(10**12) if isinstance(self.lam, float) else self.lam
        return EquationSpec(self.n, Power(critical_power(self.n), lam))

    def validity_interval(self) -> tuple:
        """The connected interval around the vertex (or all of R) where the quadratic is positive."""
        a, b, g = self.alpha, self.beta, self.gamma
        if g == 0:
            if b == 0:
                return (-math.inf, math.inf) if a > 0 else (0.0, 0.0)
            root = -a / (2 * b)
            return (root, math.inf) if b > 0 else (-math.inf, root)
        disc = b * b - a * g
        if disc <= 0:
            return (-math.inf, math.inf) if g > 0 else (0.0, 0.0)
        r1 = (-b - math.sqrt(disc)) / g
        r2 = (-b + math.sqrt(disc)) / g
        lo, hi = sorted((r1, r2))
        if g < 0:
            return (lo, hi)
        # two unbounded components; report the right one
        return (hi, math.inf)

    def to_json(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "A": self.amp}


def eval_family(fam: SolutionFamily, x: float, order: int | None = None) -> list:
    """[y, y', ..., y^(order)] at x (order defaults to 2n), exact up to rounding."""
    order = 2 * fam.n if order is None else order
    Q = fam.quadratic(x)
    if not Q > 0:
        raise DomainError(f"alpha + 2 beta x + gamma x^2 = {Q} <= 0 at x = {x}")
    dQ = 2 * fam.beta + 2 * fam.gamma * x
    ddQ = 2 * fam.gamma
    s = fam.exponent
    u = [fam.amp * Q**s]
    if order >= 1:
        u.append(s * dQ * u[0] / Q)
    # Q u^(k+1) = (s - k) Q' u^(k) + (s k - C(k,2)) Q'' u^(k-1)
    for k in range(1, order):
        u.append(((s - k) * dQ * u[k] + (s * k - comb(k, 2)) * ddQ * u[k - 1]) / Q)
    return u[: order + 1]


# --------------------------------------------------------------------------
# integration

# Dormand-Prince 5(4)
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class Trajectory:
    eq: EquationSpec
    xs: np.ndarray
    states: np.ndarray  # shape (len(xs), 2n)
    errors: np.ndarray  # local error estimate of the step ending at each sample
    status: str = "ok"
    message: str = ""

    @property
    def complete(self) -> bool:
        return self.status == "ok"

    def __len__(self) -> int:
        return len(self.xs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x"] + [f"y{k}" for k in range(self.states.shape[1])] + ["err"])
        for x, row, e in zip(self.xs, self.states, self.errors):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in row] + [repr(float(e))])
        return buf.getvalue()


def _rhs(eq: EquationSpec, params: dict):
    f = eq.f_expr().lambdify(params)
    dim = 2 * eq.n

    def F(x, u):
        out = np.empty(dim)
        out[:-1] = u[1:]
        out[-1] = -f(x, (u[0],))
        return out

    return F


def integrate(
    eq: EquationSpec,
    ics,
    span,
    tol: float | None = None,
    params: dict | None = None,
    floor: float = Y_FLOOR,
    max_steps: int = 200_000,
) -> Trajectory:
    """Adaptive Dormand-Prince integration of y^(2n) = -f(y) as a first-order system.

    Stops early, returning the partial trajectory with a diagnostic, if |y|
    drops below ``floor`` or the step size underflows.
    """
    tol = default_tol() if tol is None else tol
    if tol <= 0:
        raise DomainError("tol must be positive")
    dim = 2 * eq.n
    u = np.array(ics, dtype=float)
    if u.shape != (dim,):
        raise DomainError(f"expected {dim} initial values, got {u.shape[0] if u.ndim else 1}")
    x0, x1 = map(float, span)
    if not x1 > x0:
        raise DomainError("span must be increasing")
    missing = {name for name in eq.f_expr().params() if name not in (params or {})} - {"mu"}
    if missing:
        raise DomainError(f"numeric values needed for parameters {sorted(missing)}")
    F = _rhs(eq, params or {})

    xs, states, errs = [x0], [u.copy()], [0.0]
    x = x0
    h = min(1e-3, (x1 - x0) / 10)
    if abs(u[0]) < floor:
        return Trajectory(eq, np.array(xs), np.array(states), np.array(errs), "floor", f"initial |y| below floor {floor:g}")
    k1 = F(x, u)
    status, message = "ok", ""
    steps = 0
    while x < x1:
        if abs(u[0]) < floor:
            status, message = "floor", f"|y| = {abs(u[0]):.3g} below floor {floor:g} at x = {x!r}"
            break
        if steps >= max_steps:
            status, message = "max_steps", f"step budget exhausted at x = {x!r}"
            break
        h = min(h, x1 - x)
        if h < 1e-14 * max(1.0, abs(x)):
            status, message = "underflow", f"step size underflow at x = {x!r}"
            break
        ks = [k1]
        try:
            for i in range(1, 7):
                ui = u + h * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(F(x + _C[i] * h, ui))
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            h /= 4
            if h < 1e-14:
                status, message = "underflow", f"right-hand side failed near x = {x!r}: {exc}"
                break
            continue
        K = np.array(ks)
        new = u + h * (_B5 @ K)
        err_vec = h * ((_B5 - _B4) @ K)
        scale = tol * (1.0 + np.maximum(np.abs(u), np.abs(new)))
        err = float(np.max(np.abs(err_vec) / scale))
        steps += 1
        if not np.all(np.isfinite(new)):
            err = math.inf
        if err <= 1.0:
            x += h
            u = new
            k1 = ks[6]
            xs.append(x)
            states.append(u.copy())
            errs.append(float(np.max(np.abs(err_vec))))
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-1 / 5)))
        h *= factor
    return Trajectory(eq, np.array(xs), np.array(states), np.array(errs), status, message)


def evaluate_along(traj: Trajectory, expr: JetExpr, params: dict | None = None) -> np.ndarray:
    """Pointwise values of an expression of order < 2n along the trajectory."""
    if expr.order >= traj.states.shape[1]:
        raise DomainError(f"expression order {expr.order} exceeds the state dimension")
    fn = expr.lambdify(params or {})
    return np.array([fn(x, row) for x, row in zip(traj.xs, traj.states)])


def drift(traj: Trajectory, I, params: dict | None = None) -> float:
    """max |I(sample) - I(first sample)|."""
    expr = getattr(I, "expr", I)
    vals = evaluate_along(traj, JetExpr.coerce(expr), params)
    return float(np.max(np.abs(vals - vals[0]))) if len(vals) else 0.0


def drift_report(traj: Trajectory, integrals: dict, params: dict | None = None) -> str:
    out = {
        "n": traj.eq.n,
        "status": traj.status,
        "samples": len(traj),
        "span": [float(traj.xs[0]), float(traj.xs[-1])],
        "drift": {name: drift(traj, I, params) for name, I in sorted(integrals.items())},
    }
    if traj.message:
        out["message"] = traj.message
    return json.dumps(out, sort_keys=True)


# --------------------------------------------------------------------------
# family closure


def fit_family(n: int, lam: float, points) -> SolutionFamily:
    """Least-squares fit of alpha, beta, gamma with y^(2/(2n-1)) linear in (1, 2x, x^2).

    Scaling (alpha, beta, gamma) by t scales the amplitude by 1/t^s, so a
    point set on a family member fits to the representative with A_n = 1.
    """
    pts = np.asarray(points, dtype=float)
    if np.any(pts[:, 1] <= 0):
        raise DomainError("fit_family needs positive y samples")
    s = (2 * n - 1) / 2
    xs = pts[:, 0]
    M = np.column_stack([np.ones_like(xs), 2 * xs, xs * xs])
    (a, b, g), *_ = np.linalg.lstsq(M, pts[:, 1] ** (1 / s), rcond=None)
    return SolutionFamily(n, lam, float(a), float(b), float(g))


def closure_residual(fam: SolutionFamily, t: PointTransformation, xs) -> tuple:
    """Map samples of ``fam`` through ``t``, refit, and return (fitted, residual).

    The residual is the larger of the refit error and the equation residual
    |y^(2n) + lambda y^p| of the fitted member at the mapped abscissae.
    """
    samples = [(x, eval_family(fam, x, 0)[0]) for x in xs]
    mapped = apply_transformation(t, samples)
    fitted = fit_family(fam.n, fam.lam, mapped)
    p = float(critical_power(fam.n))
    worst = 0.0
    for X, Y in mapped:
        d = eval_family(fitted, X)
        worst = max(worst, abs(d[0] - Y), abs(d[-1] + fam.lam * d[0] ** p))
    return fitted, worst
