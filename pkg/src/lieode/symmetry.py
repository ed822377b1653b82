"""Point vector fields, prolongation, invariance and the generator catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .calculus import partial_jet, partial_x, total_derivative, total_derivative_n
from .equation import (
    Constant,
    EquationSpec,
    Exponential,
    Linear,
    Power,
    Symbolic,
    coefficient,
    critical_power,
    substitute_on_solutions,
)
from .jet import ONE, X, Y, ZERO, JetExpr, UnsupportedExpression, cos_x, function, jet, param, sin_x, xpow

__all__ = [
    "VectorField",
    "ProlongedField",
    "InvarianceResult",
    "PointTransformation",
    "prolong",
    "apply_field",
    "prolong_closed_form",
    "invariance_check",
    "catalog",
    "symmetry_dimension",
    "apply_transformation",
    "linear_ansatz_parts",
    "d_p",
]


@dataclass(frozen=True)
class VectorField:
    """xi(x, y) d/dx + eta(x, y) d/dy."""

    xi: JetExpr
    eta: JetExpr
    label: str | None = None

    def __post_init__(self):
        xi, eta = JetExpr.coerce(self.xi), JetExpr.coerce(self.eta)
        if xi.order > 0 or eta.order > 0:
            raise ValueError("point vector fields may depend on x and y only")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @property
    def characteristic(self) -> JetExpr:
        """W = eta - y' xi."""
        return self.eta - jet(1) * self.xi

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.xi + other.xi, self.eta + other.eta)

    def scaled(self, c) -> "VectorField":
        c = JetExpr.coerce(c)
        return VectorField(self.xi * c, self.eta * c, self.label)

    def to_text(self) -> str:
        return f"xi = {self.xi}; eta = {self.eta}"

    def to_json(self) -> dict:
        return {"label": self.label, "xi": str(self.xi), "eta": str(self.eta)}

    @classmethod
    def from_text(cls, text: str, label: str | None = None) -> "VectorField":
        from .grammar import parse

        parts = {}
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            key, _, value = chunk.partition("=")
            parts[key.strip()] = parse(value)
        if set(parts) != {"xi", "eta"}:
            raise ValueError(f"expected 'xi = ...; eta = ...', got {text!r}")
        return cls(parts["xi"], parts["eta"], label)


@dataclass
class ProlongedField:
    """Prolongation coefficients zeta_k = D(zeta_{k-1}) - y^(k) D(xi), cached."""

    base: VectorField
    zetas: list = field(default_factory=list)

    def zeta(self, k: int) -> JetExpr:
        if k == 0:
            return self.base.eta
        dxi = total_derivative(self.base.xi)
        while len(self.zetas) < k:
            i = len(self.zetas) + 1
            prev = self.zetas[-1] if self.zetas else self.base.eta
            self.zetas.append(total_derivative(prev) - jet(i) * dxi)
        return self.zetas[k - 1]


def prolong(vf: VectorField, order: int) -> ProlongedField:
    if order < 1:
        raise ValueError("prolongation order must be >= 1")
    pf = ProlongedField(vf)
    pf.zeta(order)
    return pf


def apply_field(vf: VectorField | ProlongedField, e: JetExpr) -> JetExpr:
    """X e with X prolonged as far as the order of e requires."""
    pf = vf if isinstance(vf, ProlongedField) else ProlongedField(vf)
    out = pf.base.xi * partial_x(e)
    for k in range(0, max(e.order, 0) + 1):
        d = partial_jet(e, k)
        if d:
            out = out + pf.zeta(k) * d
    return out


def _check_x_only(name: str, e: JetExpr) -> JetExpr:
    e = JetExpr.coerce(e)
    if e.depends_on_y():
        raise UnsupportedExpression(f"{name} must be a function of x only, got {e}")
    return e


def prolong_closed_form(xi, alpha, beta, p: int) -> JetExpr:
    """zeta_p for xi(x) d/dx + (alpha(x) y + beta(x)) d/dy in closed form."""
    if p < 1:
        raise ValueError("order must be >= 1")
    xi = _check_x_only("xi", xi)
    alpha = _check_x_only("alpha", alpha)
    beta = _check_x_only("beta", beta)
    da = [alpha]
    dxi = [xi]
    for _ in range(p + 1):
        da.append(total_derivative(da[-1]))
        dxi.append(total_derivative(dxi[-1]))
    out = total_derivative_n(beta, p) + da[p] * Y
    for j in range(1, p + 1):
        c = da[p - j] * comb(p, j) - dxi[p - j + 1] * comb(p, j - 1)
        out = out + c * jet(j)
    return out


def linear_ansatz_parts(vf: VectorField):
    """Split a field of the form xi(x) d/dx + (alpha(x) y + beta(x)) d/dy."""
    xi = _check_x_only("xi", vf.xi)
    groups = vf.eta.split(lambda m: (m.ypow, m.yatom, m.jets))
    alpha, beta = ZERO, ZERO
    one = (Fraction(1), ())
    for (yp, ya, js), part in groups.items():
        if ya or js:
            raise UnsupportedExpression(f"eta is not linear in y: {vf.eta}")
        if yp == one:
            alpha = part / Y
        elif yp == (Fraction(0), ()):
            beta = part
        else:
            raise UnsupportedExpression(f"eta is not linear in y: {vf.eta}")
    return xi, alpha, beta


@dataclass(frozen=True)
class InvarianceResult:
    holds: bool
    residual: JetExpr

    def __bool__(self) -> bool:
        return self.holds


def invariance_check(vf: VectorField, eq: EquationSpec) -> InvarianceResult:
    """X^(2n)(y^(2n) + f) restricted to solutions; zero iff X is a symmetry."""
    lhs = eq.lhs()
    raw = apply_field(vf, lhs)
    residual = substitute_on_solutions(raw, eq)
    return InvarianceResult(not residual, residual)


# --------------------------------------------------------------------------
# Generator catalog


def d_p(n: int, p) -> VectorField:
    """x d/dx + 2n/(1-p) y d/dy."""
    p = Fraction(p)
    return VectorField(X, Y * Fraction(2 * n) / (1 - p), "Dp")


def _constant_fields(n: int, lam: JetExpr) -> list:
    fac = factorial(2 * n)
    x2n = xpow(2 * n) * lam / fac
    out = [
        VectorField(X, (Y - x2n * Fraction(2 * n + 1, 2 * n - 1)) * Fraction(2 * n - 1, 2), "Y1"),
        VectorField(xpow(2), X * (Y * (2 * n - 1) - x2n), "Y2"),
        VectorField(ZERO, Y + x2n, "Y3"),
    ]
    out += [VectorField(ZERO, xpow(j) / factorial(j), f"Z{j}") for j in range(2 * n)]
    if n == 1:
        half = Fraction(1, 2)
        # images of x*u d/dx + u^2 d/du and u d/dx of u'' = 0 under u = y + lambda*x^2/2
        u = Y + lam * xpow(2) * half
        out += [
            VectorField(X * u, Y * Y - lam * lam * xpow(4) / 4, "Y4"),
            VectorField(u, -lam * X * u, "Y5"),
        ]
    return out


def _linear_fields(n: int, lam) -> list:
    out = [
        VectorField(ZERO, Y, "V1"),
        VectorField(ZERO, function("beta", 0, 2 * n), "Vbeta"),
    ]
    if n == 1:
        if lam != "lambda":
            raise UnsupportedExpression("the n = 1 linear generators need symbolic lambda (sqrt via mu)")
        mu = param("mu")
        out += [
            VectorField(sin_x(2 * mu), mu * Y * cos_x(2 * mu), "V2"),
            VectorField(cos_x(2 * mu), -mu * Y * sin_x(2 * mu), "V3"),
            VectorField(Y * sin_x(mu), mu * Y * Y * cos_x(mu), "V4"),
            VectorField(Y * cos_x(mu), -mu * Y * Y * sin_x(mu), "V5"),
        ]
    return out


def catalog(eq: EquationSpec) -> list:
    """Basis of point symmetry generators for y^(2n) + f(y) = 0."""
    n = eq.n
    f = eq.f
    out = [VectorField(ONE, ZERO, "X1")]
    if isinstance(f, Power):
        if f.p == 0:
            return out + _constant_fields(n, coefficient(f.lam))
        if f.p == 1:
            return out + _linear_fields(n, f.lam)
        if f.p == critical_power(n):
            return out + [
                VectorField(X, Y * Fraction(2 * n - 1, 2), "X2"),
                VectorField(xpow(2), X * Y * (2 * n - 1), "X3"),
            ]
        return out + [d_p(n, f.p)]
    if isinstance(f, Exponential):
        return out + [VectorField(X, -(2 * n) / coefficient(f.alpha), "D1")]
    if isinstance(f, Constant):
        return out + _constant_fields(n, coefficient(f.lam))
    if isinstance(f, Linear):
        return out + _linear_fields(n, f.lam)
    if isinstance(f, Symbolic):
        return out
    raise TypeError(f"unknown nonlinearity {f!r}")


def symmetry_dimension(eq: EquationSpec, fields: Sequence[VectorField] | None = None) -> int:
    """Dimension of the symmetry algebra; V_beta counts as 2n generators."""
    fields = catalog(eq) if fields is None else fields
    return sum(2 * eq.n if vf.label == "Vbeta" else 1 for vf in fields)


# --------------------------------------------------------------------------
# One-parameter groups


@dataclass(frozen=True)
class PointTransformation:
    kind: str  # "translation" | "scaling" | "projective"
    epsilon: float
    n: int

    def __post_init__(self):
        if self.kind not in ("translation", "scaling", "projective"):
            raise ValueError(f"unknown transformation kind {self.kind!r}")


def apply_transformation(t: PointTransformation, samples) -> list:
    """Map (x, y) samples through exp(eps X) for X = X1, X2 or X3."""
    eps = float(t.epsilon)
    s = 2 * t.n - 1
    out = []
    for x, y in samples:
        if t.kind == "translation":
            out.append((x + eps, y))
        elif t.kind == "scaling":
            out.append((math.exp(eps) * x, math.exp(eps * s / 2) * y))
        else:
            d = 1 - eps * x
            # the flow from 0 to eps passes through 1 - eps*x = 0 unless it stays positive
            if d <= 0:
                raise ValueError(f"projective map crosses its pole at sample x = {x} (1 - eps*x = {d})")
            out.append((x / d, y / d**s))
    return out
