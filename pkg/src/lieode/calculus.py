"""Total derivative, Euler operators and antiderivative recovery."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .jet import (
    ZERO,
    JetExpr,
    Monomial,
    UnsupportedExpression,
    _mul_params,
    _set_jet,
)

__all__ = [
    "OrderBound",
    "IntegrationIncomplete",
    "partial_x",
    "partial_jet",
    "total_derivative",
    "total_derivative_n",
    "higher_euler",
    "euler_lagrange",
    "replace_jet",
    "substitute_functions",
    "is_total_derivative",
    "integrate_jet",
    "integrate_x",
]


class IntegrationIncomplete(RuntimeError):
    """The Euler test passed but the structured integration could not finish."""


@dataclass(frozen=True)
class OrderBound:
    max_order: int

    def __post_init__(self):
        if self.max_order < 0:
            raise ValueError("max_order must be >= 0")


def _bound(bound, e: JetExpr) -> int:
    if bound is None:
        return max(e.order, 0)
    return bound.max_order if isinstance(bound, OrderBound) else int(bound)


# --------------------------------------------------------------------------
# partial derivatives


def _dx_term(m: Monomial, c: Fraction):
    if m.xpow:
        yield m.with_(xpow=m.xpow - 1), c * m.xpow
    atom = m.xatom
    if not atom:
        return
    kind = atom[0]
    if kind == "fn":
        _, name, order, period = atom
        yield m.with_(xatom=("fn", name, order + 1, period)), c
        return
    r, ps = atom[1]
    params = _mul_params(m.params, ps)
    if kind == "exp":
        yield m.with_(params=params), c * r
    elif kind == "sin":
        yield m.with_(params=params, xatom=("cos", atom[1])), c * r
    else:
        yield m.with_(params=params, xatom=("sin", atom[1])), -c * r


def _dy_term(m: Monomial, c: Fraction):
    c0, terms = m.ypow
    if c0 or terms:
        lowered = m.with_(ypow=(c0 - 1, terms))
        if c0:
            yield lowered, c * c0
        for name, v in terms:
            yield lowered.with_(params=_mul_params(m.params, ((name, 1),))), c * v
    if m.yatom:
        r, ps = m.yatom[1]
        yield m.with_(params=_mul_params(m.params, ps)), c * r


def partial_x(e: JetExpr) -> JetExpr:
    """Explicit partial derivative in x (jets held fixed)."""
    return e.map_terms(_dx_term)


def partial_jet(e: JetExpr, k: int) -> JetExpr:
    """Partial derivative with respect to y^(k) (k = 0 is y)."""
    if k == 0:
        return e.map_terms(_dy_term)

    def fn(m: Monomial, c: Fraction):
        e_k = m.jet_exponent(k)
        if e_k:
            yield m.with_(jets=_set_jet(m.jets, k, e_k - 1)), c * e_k

    return e.map_terms(fn)


# --------------------------------------------------------------------------
# total derivative


def total_derivative(e: JetExpr) -> JetExpr:
    """D = d/dx + sum_k y^(k+1) d/dy^(k)."""

    def fn(m: Monomial, c: Fraction):
        yield from _dx_term(m, c)
        for m2, c2 in _dy_term(m, c):
            yield m2.with_(jets=_set_jet(m2.jets, 1, m2.jet_exponent(1) + 1)), c2
        for k, e_k in enumerate(m.jets, start=1):
            if e_k:
                jets = _set_jet(m.jets, k, e_k - 1)
                jets = _set_jet(jets, k + 1, (jets[k] if k < len(jets) else 0) + 1)
                yield m.with_(jets=jets), c * e_k

    return e.map_terms(fn)


def total_derivative_n(e: JetExpr, times: int) -> JetExpr:
    for _ in range(times):
        if not e:
            break
        e = total_derivative(e)
    return e


def higher_euler(e: JetExpr, s: int = 0, bound=None) -> JetExpr:
    """delta e / delta y^(s) = sum_i (-1)^i D^i (de/dy^(s+i)), i <= max_order - s."""
    top = _bound(bound, e)
    out = ZERO
    for i in range(0, top - s + 1):
        term = total_derivative_n(partial_jet(e, s + i), i)
        out = out + term if i % 2 == 0 else out - term
    return out


def euler_lagrange(e: JetExpr, bound=None) -> JetExpr:
    return higher_euler(e, 0, bound)


# --------------------------------------------------------------------------
# substitution


def replace_jet(e: JetExpr, k: int, value: JetExpr) -> JetExpr:
    """Replace every y^(k) (k >= 1) by ``value``."""
    powers = {}
    out = {}
    rest = []
    for m, c in e.terms():
        e_k = m.jet_exponent(k)
        if not e_k:
            rest.append((m, c))
            continue
        out.setdefault(e_k, []).append((m.with_(jets=_set_jet(m.jets, k, 0)), c))
    result = JetExpr.from_terms(rest)
    for e_k, terms in out.items():
        if e_k not in powers:
            powers[e_k] = value**e_k
        result = result + JetExpr.from_terms(terms) * powers[e_k]
    return result


def substitute_functions(e: JetExpr, values: dict) -> JetExpr:
    """Replace named function atoms ``name^(k)(x)`` by D^k(values[name]).

    Only atoms without a period are matched.
    """
    cache = {}

    def deriv(name, k):
        if (name, k) not in cache:
            cache[(name, k)] = total_derivative_n(JetExpr.coerce(values[name]), k)
        return cache[(name, k)]

    result = ZERO
    plain = []
    for m, c in e.terms():
        atom = m.xatom
        if atom and atom[0] == "fn" and atom[1] in values and not atom[3]:
            result = result + JetExpr.from_terms([(m.with_(xatom=()), c)]) * deriv(atom[1], atom[2])
        else:
            plain.append((m, c))
    return result + JetExpr.from_terms(plain)


# --------------------------------------------------------------------------
# antiderivatives


def _inv_scale(scale):
    r, ps = scale
    return Fraction(1) / r, tuple((k, -v) for k, v in ps)


def _term(m: Monomial, c) -> JetExpr:
    return JetExpr.from_terms([(m, c)])


def _scale_expr(scale) -> JetExpr:
    return JetExpr.from_terms([(Monomial(params=scale[1]), scale[0])])


@lru_cache(maxsize=None)
def _integrate_x_mono(m: Monomial) -> JetExpr:
    """Antiderivative in x of a y-free monomial (coefficient 1)."""
    if m.depends_on_y():
        raise IntegrationIncomplete(f"term {_term(m, 1)} depends on y")
    a = m.xpow
    atom = m.xatom
    if not atom:
        if a == -1:
            raise IntegrationIncomplete("logarithmic antiderivative in x")
        return _term(m.with_(xpow=a + 1), Fraction(1, a + 1))
    if a < 0:
        raise IntegrationIncomplete("negative power of x times a transcendental factor")
    kind = atom[0]
    lower = m.with_(xpow=a - 1) if a else None
    if kind == "fn":
        _, name, order, period = atom
        if order == 0:
            if not period:
                raise IntegrationIncomplete(f"no antiderivative for {name}(x)")
            # f = -f^(P)/lambda
            lifted = m.with_(xatom=("fn", name, period, period), params=_mul_params(m.params, (("lambda", -1),)))
            return -_integrate_x_mono(lifted)
        prim = _term(m.with_(xatom=("fn", name, order - 1, period)), 1)
        if not a:
            return prim
        return prim - a * _integrate_x_mono(lower.with_(xatom=("fn", name, order - 1, period)))
    inv = _scale_expr(_inv_scale(atom[1]))
    if kind == "exp":
        prim = _term(m, 1) * inv
        if not a:
            return prim
        return prim - a * inv * _integrate_x_mono(lower)
    if kind == "sin":
        cos_m = m.with_(xatom=("cos", atom[1]))
        prim = -(_term(cos_m, 1) * inv)
        if not a:
            return prim
        return prim + a * inv * _integrate_x_mono(lower.with_(xatom=("cos", atom[1])))
    sin_m = m.with_(xatom=("sin", atom[1]))
    prim = _term(sin_m, 1) * inv
    if not a:
        return prim
    return prim - a * inv * _integrate_x_mono(lower.with_(xatom=("sin", atom[1])))


def integrate_x(e: JetExpr) -> JetExpr:
    """Antiderivative in x of a y-free expression."""
    out = ZERO
    for m, c in e.terms():
        params = m.params
        out = out + _integrate_x_mono(m.with_(params=())) * _term(Monomial(params=params), c)
    return out


def _integrate_y_mono(m: Monomial, c: Fraction) -> JetExpr:
    c0, terms = m.ypow
    if m.yatom:
        if terms or c0 < 0 or c0.denominator != 1:
            raise IntegrationIncomplete("y-power times exp(c*y) outside the supported class")
        k = int(c0)
        scale = m.yatom[1]
        out = ZERO
        inv = _scale_expr(_inv_scale(scale))
        base = m.with_(ypow=(Fraction(0), ()))
        # int y^k e^{sy} dy = e^{sy} sum_i (-1)^i k!/(k-i)! y^(k-i) / s^(i+1)
        for i in range(k + 1):
            coef = Fraction((-1) ** i * factorial(k), factorial(k - i))
            mono = base.with_(ypow=(Fraction(k - i), ()))
            out = out + _term(mono, c * coef) * inv ** (i + 1)
        return out
    if terms:
        raise IntegrationIncomplete("division by a symbolic exponent")
    if c0 == -1:
        raise IntegrationIncomplete("logarithmic antiderivative in y")
    return _term(m.with_(ypow=(c0 + 1, ())), c / (c0 + 1))


def integrate_jet(e: JetExpr, k: int) -> JetExpr:
    """Antiderivative with respect to y^(k), other variables held fixed."""
    if k == 0:
        out = ZERO
        for m, c in e.terms():
            out = out + _integrate_y_mono(m, c)
        return out

    def fn(m: Monomial, c: Fraction):
        e_k = m.jet_exponent(k)
        yield m.with_(jets=_set_jet(m.jets, k, e_k + 1)), c / (e_k + 1)

    return e.map_terms(fn)


def _antiderivative(e: JetExpr) -> JetExpr:
    acc = ZERO
    residue = e
    while residue:
        k = residue.order
        if k == 0:
            if residue.depends_on_y():
                raise IntegrationIncomplete(f"order-zero residue {residue} depends on y")
            return acc + integrate_x(residue)
        linear, rest = [], []
        for m, c in residue.terms():
            e_k = m.jet_exponent(k)
            if e_k > 1:
                raise IntegrationIncomplete(f"nonlinear in the top jet y^({k})")
            (linear if e_k == 1 else rest).append((m.with_(jets=_set_jet(m.jets, k, 0)), c))
        top = JetExpr.from_terms(linear)
        step = integrate_jet(top, k - 1)
        acc = acc + step
        new = residue - total_derivative(step)
        if new.order >= k and any(m.jet_exponent(k) for m, _ in new.terms()):
            raise IntegrationIncomplete(f"top jet y^({k}) did not cancel")
        residue = new
    return acc


def is_total_derivative(e: JetExpr, bound=None):
    """Return A with D(A) = e, or None when e fails the Euler test.

    A is normalised to have no constant term.  Raises
    :class:`IntegrationIncomplete` if e passes the Euler test but the
    structured integration cannot recover A.
    """
    if not e:
        return ZERO
    if euler_lagrange(e, bound):
        return None
    try:
        a = _antiderivative(e).drop_constant()
    except UnsupportedExpression as exc:
        raise IntegrationIncomplete(str(exc)) from exc
    if total_derivative(a) != e:
        raise IntegrationIncomplete(f"recovered potential does not differentiate back to {e}")
    return a

