"""Lagrangians, the Noether gate, and first integrals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import (
    IntegrationIncomplete,
    OrderBound,
    higher_euler,
    integrate_jet,
    is_total_derivative,
    total_derivative,
    total_derivative_n,
)
from .equation import EquationSpec, Power, coefficient, critical_power, substitute_on_solutions
from .jet import ONE, X, Y, ZERO, JetExpr, UnsupportedExpression, jet, param, xpow, ypow
from .symmetry import VectorField, apply_field, catalog

__all__ = [
    "Lagrangian",
    "NoetherVerdict",
    "FirstIntegral",
    "make_lagrangian",
    "noether_residual",
    "noether_check",
    "noether_operator_integral",
    "first_integral_catalog",
    "synthesized_integrals",
    "combination_identity",
    "combination_template",
    "noether_identity_check",
    "gate_scalar",
    "gate_root",
    "is_conserved",
]


@dataclass(frozen=True)
class Lagrangian:
    n: int
    expr: JetExpr
    potential: JetExpr  # F(y)

    def euler_lagrange(self) -> JetExpr:
        return higher_euler(self.expr, 0, OrderBound(self.n))


def make_lagrangian(eq: EquationSpec) -> Lagrangian:
    """(y^(n))^2/2 + F(y) with F' = (-1)^n f."""
    n = eq.n
    sign = -1 if n % 2 else 1
    f = eq.f_expr()
    if isinstance(eq.f, Power) and eq.f.p == critical_power(n):
        # literal critical-power form
        F = coefficient(eq.f.lam) * ypow(Fraction(2, 1 - 2 * n)) * Fraction(sign * (1 - 2 * n), 2)
    else:
        try:
            F = integrate_jet(f, 0) * sign
        except IntegrationIncomplete as exc:
            raise UnsupportedExpression(f"no antiderivative of f = {f} in the term algebra: {exc}") from exc
    expr = jet(n) ** 2 / 2 + F
    return Lagrangian(n, expr, F)


def noether_residual(vf: VectorField, L: Lagrangian) -> JetExpr:
    """X L + L D(xi)."""
    return apply_field(vf, L.expr) + L.expr * total_derivative(vf.xi)


@dataclass(frozen=True)
class NoetherVerdict:
    kind: str  # "Variational" | "Divergence" | "NotNoether"
    gauge: JetExpr | None = None
    residual: JetExpr | None = None

    @property
    def is_noether(self) -> bool:
        return self.kind != "NotNoether"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.gauge is not None:
            out["gauge"] = str(self.gauge)
        if self.residual is not None:
            out["residual"] = str(self.residual)
        return out


def noether_check(vf: VectorField, eq: EquationSpec, bound: OrderBound | None = None) -> NoetherVerdict:
    L = make_lagrangian(eq)
    r = noether_residual(vf, L)
    if not r:
        return NoetherVerdict("Variational")
    a = is_total_derivative(r, bound)
    if a is None or a.is_constant():
        return NoetherVerdict("NotNoether", residual=r)
    return NoetherVerdict("Divergence", gauge=a)


@dataclass(frozen=True)
class FirstIntegral:
    expr: JetExpr
    source: str | None = None
    gauge: JetExpr | None = None

    def __str__(self) -> str:
        return str(self.expr)


def noether_operator_integral(vf: VectorField, L: Lagrangian, gauge: JetExpr | None = None) -> FirstIntegral:
    """I = xi L + sum_{j<n} D^j(W) dL/dy^(j+1) - A."""
    A = ZERO if gauge is None else JetExpr.coerce(gauge)
    r = noether_residual(vf, L)
    if total_derivative(A) != r:
        raise ValueError(f"{vf.label or vf.to_text()} is not a Noether symmetry with gauge {A}")
    bound = OrderBound(L.n)
    W = vf.characteristic
    out = vf.xi * L.expr - A
    dW = W
    for j in range(L.n):
        out = out + dW * higher_euler(L.expr, j + 1, bound)
        dW = total_derivative(dW)
    return FirstIntegral(out, vf.label, gauge)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _jet_or_zero(k: int) -> JetExpr:
    # y^(-1) terms carry a zero coefficient in the closed forms
    return jet(k) if k >= 0 else ZERO


def first_integral_catalog(n: int, lam="lambda") -> dict:
    """Closed-form integrals I1, I2, I3 of the critical equation, as printed."""
    lam = coefficient(lam)
    F = lam * ypow(Fraction(2, 1 - 2 * n)) * Fraction(_sign(n) * (1 - 2 * n), 2)
    yn2 = jet(n) ** 2 / 2
    x, x2 = X, xpow(2)
    i1 = yn2 + F
    i2 = x * yn2 + x * F
    i3 = x2 * yn2 + x2 * F - jet(n - 1) ** 2 * Fraction(n * n, 2)
    for j in range(n):
        tail = jet(2 * n - j - 1)
        i1 = i1 + jet(j + 1) * tail * _sign(n - j)
        i2 = i2 + (jet(j) * Fraction(2 * n - 2 * j - 1, 2) - x * jet(j + 1)) * tail * _sign(n - j - 1)
        i3 = i3 + (
            _jet_or_zero(j - 1) * (j * (2 * n - j)) + x * jet(j) * (2 * n - 2 * j - 1) - x2 * jet(j + 1)
        ) * tail * _sign(n - j - 1)
    gauge = jet(n - 1) ** 2 * Fraction(n * n, 2)
    return {
        "I1": FirstIntegral(i1, "X1"),
        "I2": FirstIntegral(i2, "X2"),
        "I3": FirstIntegral(i3, "X3", gauge),
    }


def synthesized_integrals(n: int, lam="lambda") -> dict:
    """I1, I2, I3 produced by the Noether operator from the critical catalog."""
    eq = EquationSpec(n, Power(critical_power(n), lam))
    L = make_lagrangian(eq)
    out = {}
    for vf, name in zip(catalog(eq), ("I1", "I2", "I3")):
        verdict = noether_check(vf, eq)
        if not verdict.is_noether:
            raise AssertionError(f"{vf.label} unexpectedly fails the Noether gate")
        out[name] = noether_operator_integral(vf, L, verdict.gauge)
    return out


def is_conserved(I: JetExpr | FirstIntegral, eq: EquationSpec) -> bool:
    expr = I.expr if isinstance(I, FirstIntegral) else I
    return not substitute_on_solutions(total_derivative(expr), eq)


def combination_identity(n: int, lam="lambda") -> JetExpr:
    """x^2 I1 - 2x I2 + I3 in canonical form."""
    ints = synthesized_integrals(n, lam)
    return xpow(2) * ints["I1"].expr - X * ints["I2"].expr * 2 + ints["I3"].expr


def combination_template(n: int) -> JetExpr:
    """sum_j (-1)^(n-j) j(2n-j) y^(j-1) y^(2n-j-1) + (n^2/2)(y^(n-1))^2.

    Together with x^2 I1 - 2x I2 + I3 it sums to zero.
    """
    out = jet(n - 1) ** 2 * Fraction(n * n, 2)
    for j in range(1, n):
        out = out + jet(j - 1) * jet(2 * n - j - 1) * (_sign(n - j) * j * (2 * n - j))
    return out


def noether_identity_check(vf: VectorField, L: Lagrangian, bound: OrderBound | None = None) -> bool:
    """X(L) + D(xi) L == W dL/dy + D(N(L)) as an exact identity."""
    top = bound.max_order if bound is not None else max(L.expr.order, 0)
    bound = OrderBound(top)
    W = vf.characteristic
    lhs = noether_residual(vf, L)
    N = vf.xi * L.expr
    dW = W
    for j in range(top):
        N = N + dW * higher_euler(L.expr, j + 1, bound)
        dW = total_derivative(dW)
    rhs = W * higher_euler(L.expr, 0, bound) + total_derivative(N)
    return lhs == rhs


# --------------------------------------------------------------------------
# gate scalar with symbolic p


def gate_scalar(n: int):
    """(numerator, denominator) of (D_p L + L D xi)/L as polynomials in the parameter p.

    Computed with the scaled field (1-p) D_p and scaled Lagrangian (p+1) L so
    that every coefficient is polynomial in p; the ratio is checked to be
    exact before it is returned.
    """
    p = param("p")
    sign = _sign(n)
    scaled_field = VectorField(X * (1 - p), Y * (2 * n))
    scaled_L = jet(n) ** 2 / 2 * (p + 1) + param("lambda") * ypow(p + 1) * sign
    M = Lagrangian(n, scaled_L, ZERO)
    R = noether_residual(scaled_field, M)
    key = (Fraction(1), (("p", Fraction(1)),))
    part = R.split(lambda m: m.ypow).get(key, ZERO)
    numerator = part * param("lambda", -1) * ypow(-(p + 1)) * sign
    if numerator.depends_on_y() or R != numerator * scaled_L:
        raise AssertionError("residual is not a scalar multiple of the Lagrangian")
    return numerator, 1 - p


def gate_root(n: int) -> Fraction:
    """The unique p where the gate numerator vanishes."""
    num, _ = gate_scalar(n)
    parts = num.split(lambda m: m.params)
    a = parts.get((), ZERO)
    b = parts.get((("p", 1),), ZERO)
    if set(parts) - {(), (("p", 1),)}:
        raise AssertionError(f"gate numerator {num} is not linear in p")
    return -a.constant_value() / (b / param("p")).constant_value()
