"""The equation family y^(2n) + f(y) = 0 and restriction to its solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .calculus import replace_jet, total_derivative
from .jet import ONE, Y, JetExpr, UnsupportedExpression, const, exp_y, param, ypow

__all__ = [
    "Power",
    "Exponential",
    "Constant",
    "Linear",
    "Symbolic",
    "Nonlinearity",
    "EquationSpec",
    "critical_power",
    "coefficient",
    "substitute_on_solutions",
]

Coef = Union[str, int, Fraction]


def coefficient(value: Coef) -> JetExpr:
    """A symbolic parameter name or an exact number as a JetExpr."""
    if isinstance(value, str):
        return param(value)
    return const(Fraction(value))


def critical_power(n: int) -> Fraction:
    """The exponent (1+2n)/(1-2n)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return Fraction(1 + 2 * n, 1 - 2 * n)


@dataclass(frozen=True)
class Power:
    p: Fraction
    lam: Coef = "lambda"

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))

    def expr(self) -> JetExpr:
        return coefficient(self.lam) * ypow(self.p)


@dataclass(frozen=True)
class Exponential:
    alpha: Coef = "alpha"
    lam: Coef = "lambda"

    def expr(self) -> JetExpr:
        return coefficient(self.lam) * exp_y(coefficient(self.alpha))


@dataclass(frozen=True)
class Constant:
    lam: Coef = "lambda"

    def expr(self) -> JetExpr:
        return coefficient(self.lam) * ONE


@dataclass(frozen=True)
class Linear:
    lam: Coef = "lambda"

    def expr(self) -> JetExpr:
        return coefficient(self.lam) * Y


@dataclass(frozen=True)
class Symbolic:
    f: JetExpr

    def __post_init__(self):
        f = JetExpr.coerce(self.f)
        if f.order > 0 or any(m.xpow or m.xatom for m, _ in f.terms()):
            raise UnsupportedExpression(f"nonlinearity must depend on y only: {f}")
        object.__setattr__(self, "f", f)

    def expr(self) -> JetExpr:
        return self.f


Nonlinearity = Union[Power, Exponential, Constant, Linear, Symbolic]


@dataclass(frozen=True)
class EquationSpec:
    n: int
    f: Nonlinearity = field(default_factory=lambda: Symbolic(const(0)))

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def order(self) -> int:
        return 2 * self.n

    def f_expr(self) -> JetExpr:
        return self.f.expr()

    def lhs(self) -> JetExpr:
        """y^(2n) + f(y)."""
        from .jet import jet

        return jet(2 * self.n) + self.f_expr()

    def is_critical(self) -> bool:
        return isinstance(self.f, Power) and self.f.p == critical_power(self.n)

    def describe(self) -> str:
        from .jet import jet

        f = str(self.f_expr())
        sep = f" - {f[1:]}" if f.startswith("-") else f" + {f}"
        return f"{jet(2 * self.n)}{sep} = 0"


def substitute_on_solutions(e: JetExpr, eq: EquationSpec) -> JetExpr:
    """Eliminate y^(m), m >= 2n, using y^(2n) = -f(y) and its derivatives.

    The result has jet order < 2n.
    """
    top = 2 * eq.n
    order = e.order
    if order < top:
        return e
    repl = {top: -eq.f_expr()}
    for m in range(top + 1, order + 1):
        repl[m] = total_derivative(repl[m - 1])
    for m in range(order, top - 1, -1):
        e = replace_jet(e, m, repl[m])
    return e
