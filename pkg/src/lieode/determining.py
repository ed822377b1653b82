"""Determining equations and their solution for the classified families.

For n > 1 the symmetry ansatz is xi = xi(x), eta = alpha(x) y + beta(x); the
system reduces to xi quadratic, alpha affine and one compatibility condition
in f.  For n = 1 the ansatz is xi = a(x) y + b(x), eta = a'(x) y^2 + c(x) y + d(x).

Unknown functions are solved by coefficient matching over a polynomial ansatz
with unknown coefficients; the resulting homogeneous linear system is solved
exactly over the field of rational functions in the equation's parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import sympy

from .calculus import partial_jet, substitute_functions, total_derivative, total_derivative_n
from .equation import (
    Constant,
    EquationSpec,
    Exponential,
    Linear,
    Nonlinearity,
    Power,
    Symbolic,
    critical_power,
)
from .jet import X, Y, ZERO, JetExpr, Monomial, UnsupportedExpression, const, function, param, xpow
from .symmetry import VectorField, catalog, linear_ansatz_parts

__all__ = [
    "DeterminingSystem",
    "ReducedSystem",
    "N1System",
    "ClassificationResult",
    "determining_system",
    "determining_system_n1",
    "solve_linear_conditions",
    "classify_power",
    "classify",
    "field_rank",
    "same_span",
]

XI, ALPHA, BETA = function("xi"), function("alpha"), function("beta")


def _fn(name: str, k: int) -> JetExpr:
    return function(name, k)


@dataclass(frozen=True)
class ReducedSystem:
    """xi = a1 x^2 + a2 x + a3, alpha = (2n-1)/2 (2 a1 x + a2) + k1, plus the residual condition."""

    n: int
    unknowns: tuple = ("a1", "a2", "a3", "k1")

    @property
    def xi(self) -> JetExpr:
        a1, a2, a3, _ = (param(u) for u in self.unknowns)
        return a1 * xpow(2) + a2 * X + a3

    @property
    def alpha(self) -> JetExpr:
        a1, a2, _, k1 = (param(u) for u in self.unknowns)
        return (a1 * X * 2 + a2) * Fraction(2 * self.n - 1, 2) + k1

    def residual(self, f: JetExpr, beta: JetExpr = BETA) -> JetExpr:
        """Left side of the compatibility condition in f, with beta(x) left free by default."""
        n = self.n
        a1, a2, _, k1 = (param(u) for u in self.unknowns)
        lin = a1 * X * 2 + a2
        df = partial_jet(f, 0)
        return (
            (lin * Fraction(2 * n - 1, 2) + k1) * Y * df
            + beta * df
            + total_derivative_n(beta, 2 * n)
            + (lin * Fraction(2 * n + 1, 2) - k1) * f
        )


@dataclass(frozen=True)
class DeterminingSystem:
    """Structured determining equations for n > 1 in the unknown functions xi, alpha, beta."""

    n: int
    multiplier: JetExpr
    jet_relations: tuple  # ((k, expr), ...) for 1 <= k < 2n
    reduced: ReducedSystem | None

    def compatibility(self, f: JetExpr) -> JetExpr:
        """(alpha y + beta) f' + beta^(2n) + alpha^(2n) y - multiplier * f."""
        n2 = 2 * self.n
        df = partial_jet(f, 0)
        return (ALPHA * Y + BETA) * df + _fn("beta", n2) + _fn("alpha", n2) * Y - self.multiplier * f

    def equations(self, f: JetExpr) -> dict:
        out = {f"relation[{k}]": e for k, e in self.jet_relations}
        out["compatibility"] = self.compatibility(f)
        return out

    def residuals(self, vf: VectorField, f: JetExpr) -> dict:
        """Substitute a concrete field of the linear ansatz; all zero for a symmetry."""
        xi, alpha, beta = linear_ansatz_parts(vf)
        values = {"xi": xi, "alpha": alpha, "beta": beta}
        return {k: substitute_functions(e, values) for k, e in self.equations(f).items()}


def determining_system(n: int) -> DeterminingSystem:
    if n == 1:
        raise ValueError("n = 1 admits y-dependent xi; use determining_system_n1")
    if n < 1:
        raise ValueError("n must be a positive integer")
    n2 = 2 * n
    multiplier = ALPHA - _fn("xi", 1) * n2
    relations = tuple(
        (k, _fn("alpha", n2 - k) * comb(n2, k) - _fn("xi", n2 - k + 1) * comb(n2, k - 1)) for k in range(1, n2)
    )
    return DeterminingSystem(n, multiplier, relations, ReducedSystem(n))


# --------------------------------------------------------------------------
# n = 1


@dataclass(frozen=True)
class N1System:
    """xi = a y + b, eta = a' y^2 + c y + d and the two remaining conditions."""

    f: JetExpr
    xi: JetExpr
    eta: JetExpr
    conditions: tuple
    case: str | None = None


def _n1_conditions(f: JetExpr, fns: dict) -> tuple:
    a, b, c, d = (fns[k] for k in "abcd")
    D = total_derivative_n
    df = partial_jet(f, 0)
    first = D(c, 1) * 2 - D(b, 2) + D(a, 2) * Y * 3 + a * f * 3
    second = (
        D(d, 2)
        + (D(b, 1) * 2 - c) * f
        + d * df
        + c * Y * df
        + D(a, 1) * Y * Y * df
        + D(c, 2) * Y
        + D(a, 3) * Y * Y
    )
    return first, second


def _power_case(n: int, p: Fraction) -> str:
    if p == 0:
        return "constant"
    if p == 1:
        return "linear"
    if p == critical_power(n):
        return "critical"
    return "generic"


def determining_system_n1(f: Nonlinearity | JetExpr) -> N1System:
    case = None
    if isinstance(f, Power):
        case = _power_case(1, f.p)
    fexpr = f.expr() if not isinstance(f, JetExpr) else f
    fns = {k: function(k) for k in "abcd"}
    xi = fns["a"] * Y + fns["b"]
    eta = total_derivative(fns["a"]) * Y * Y + fns["c"] * Y + fns["d"]
    return N1System(fexpr, xi, eta, _n1_conditions(fexpr, fns), case)


# --------------------------------------------------------------------------
# linear algebra over Q(parameters)


def _to_sympy(e: JetExpr, symbols: dict):
    out = sympy.Integer(0)
    for m, c in e.terms():
        if not m.is_constant():
            raise UnsupportedExpression(f"coefficient {e} is not a pure parameter expression")
        term = sympy.Rational(c.numerator, c.denominator)
        for name, k in m.params:
            if name not in symbols:
                symbols[name] = sympy.Symbol(name)
            term *= symbols[name] ** k
        out += term
    return out


def _from_sympy(expr, symbols: dict) -> JetExpr:
    expr = sympy.together(sympy.expand(expr))
    num, den = sympy.fraction(expr)
    gens = list(symbols.values())
    den_poly = sympy.Poly(den, *gens) if gens else None
    if den_poly is not None and len(den_poly.terms()) != 1:
        raise UnsupportedExpression(f"coefficient {expr} is not a Laurent polynomial")
    names = list(symbols.keys())
    result = ZERO
    if den_poly is not None:
        (dexps, dcoef), = den_poly.terms()
    else:
        dexps, dcoef = (), sympy.Integer(den)
    num_poly = sympy.Poly(num, *gens) if gens else None
    terms = num_poly.terms() if num_poly is not None else [((), sympy.Integer(num))]
    for exps, coef in terms:
        q = sympy.Rational(coef) / sympy.Rational(dcoef)
        mono = const(Fraction(int(q.p), int(q.q)))
        for name, e1, e0 in zip(names, exps, dexps or (0,) * len(names)):
            if e1 - e0:
                mono = mono * param(name, int(e1 - e0))
        result = result + mono
    return result


def solve_linear_conditions(equations, unknowns) -> list:
    """Basis of the solution space of equations linear in the unknown parameters.

    Every equation must hold identically in x, y and the jets; coefficients of
    distinct (x, y, jet, atom) monomials are separated, parameters other than
    the unknowns stay in the coefficient field.  Returns a list of
    ``{unknown: JetExpr}`` assignments.
    """
    unknowns = list(unknowns)
    index = {u: i for i, u in enumerate(unknowns)}
    rows: dict = {}
    for eq in equations:
        for m, c in eq.terms():
            hit = [(name, k) for name, k in m.params if name in index]
            if len(hit) != 1 or hit[0][1] != 1:
                if not hit:
                    raise UnsupportedExpression(f"inhomogeneous term in determining equation: {c}*{m}")
                raise UnsupportedExpression("determining equation is not linear in the unknowns")
            u = hit[0][0]
            rest = tuple((n, k) for n, k in m.params if n != u)
            key = (id(eq), m.with_(params=()))
            row = rows.setdefault(key, {})
            coef = JetExpr.from_terms([(Monomial(params=rest), c)])
            row[u] = row.get(u, ZERO) + coef
    symbols: dict = {}
    matrix = [[_to_sympy(row.get(u, ZERO), symbols) for u in unknowns] for row in rows.values()]
    if not matrix:
        matrix = [[0] * len(unknowns)]
    M = sympy.Matrix(matrix)
    basis = []
    for vec in M.nullspace(simplify=True):
        vec = [sympy.together(v) for v in vec]
        # clear denominators, then strip the common content
        dens = [sympy.fraction(v)[1] for v in vec]
        lcm = sympy.lcm_list(dens) if dens else 1
        vec = [sympy.cancel(v * lcm) for v in vec]
        nonzero = [v for v in vec if v != 0]
        g = sympy.gcd_list(nonzero) if nonzero else 1
        vec = [sympy.cancel(v / g) for v in vec]
        basis.append({u: _from_sympy(v, symbols) for u, v in zip(unknowns, vec)})
    return basis


def _field_rows(fields) -> tuple:
    keys = {}
    rows = []
    for vf in fields:
        row = {}
        for slot, e in (("xi", vf.xi), ("eta", vf.eta)):
            for m, c in e.terms():
                key = (slot, m.with_(params=()))
                keys.setdefault(key, len(keys))
                row[key] = row.get(key, ZERO) + JetExpr.from_terms([(Monomial(params=m.params), c)])
        rows.append(row)
    return rows, list(keys)


def field_rank(fields) -> int:
    """Rank of a list of vector fields over the constants (parameters symbolic)."""
    fields = list(fields)
    if not fields:
        return 0
    rows, keys = _field_rows(fields)
    symbols: dict = {}
    M = sympy.Matrix([[_to_sympy(r.get(k, ZERO), symbols) for k in keys] for r in rows])
    return M.rank(simplify=True)


def same_span(a, b) -> bool:
    a, b = list(a), list(b)
    ra, rb = field_rank(a), field_rank(b)
    return ra == rb == field_rank(a + b)


# --------------------------------------------------------------------------
# classification


@dataclass
class ClassificationResult:
    n: int
    family: str
    case: str
    dimension: int
    basis: list = field(default_factory=list)
    method: str = "solver"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "family": self.family,
            "case": self.case,
            "dimension": self.dimension,
            "method": self.method,
            "generators": [vf.to_json() for vf in self.basis],
        }


def _fields_from_solutions(solutions, make) -> list:
    out = []
    for i, sol in enumerate(solutions, start=1):
        xi, eta = make(sol)
        out.append(VectorField(xi, eta, f"S{i}"))
    return out


def _subs_unknowns(e: JetExpr, sol: dict) -> JetExpr:
    out = ZERO
    for m, c in e.terms():
        hit = [(name, k) for name, k in m.params if name in sol]
        rest = tuple((n, k) for n, k in m.params if n not in sol)
        term = JetExpr.from_terms([(m.with_(params=rest), c)])
        for name, k in hit:
            term = term * sol[name] ** k
        out = out + term
    return out


def _solve_reduced(n: int, f: JetExpr, beta_template: JetExpr | None = None) -> tuple:
    red = ReducedSystem(n, ("_a1", "_a2", "_a3", "_k1"))
    unknowns = list(red.unknowns)
    if beta_template is None:
        coeffs = [f"_b{j}" for j in range(2 * n + 2)]
        beta = sum((param(u) * xpow(j) for j, u in enumerate(coeffs)), ZERO)
    else:
        coeffs = ["_b"]
        beta = param("_b") * beta_template
    unknowns += coeffs
    eqn = red.residual(f, beta)
    sols = solve_linear_conditions([eqn], unknowns)

    def make(sol):
        return _subs_unknowns(red.xi, sol), _subs_unknowns(red.alpha * Y + beta, sol)

    return _fields_from_solutions(sols, make)


def _solve_n1(f: JetExpr, degree: int = 5) -> list:
    fns = {}
    unknowns = []
    for k in "abcd":
        cs = [f"_{k}{j}" for j in range(degree + 1)]
        unknowns += cs
        fns[k] = sum((param(u) * xpow(j) for j, u in enumerate(cs)), ZERO)
    eqs = list(_n1_conditions(f, fns))
    sols = solve_linear_conditions(eqs, unknowns)
    xi = fns["a"] * Y + fns["b"]
    eta = total_derivative(fns["a"]) * Y * Y + fns["c"] * Y + fns["d"]
    return _fields_from_solutions(sols, lambda sol: (_subs_unknowns(xi, sol), _subs_unknowns(eta, sol)))


def classify_power(n: int, p, lam="lambda") -> ClassificationResult:
    """Solve the determining equations for f = lam * y^p."""
    p = Fraction(p)
    case = _power_case(n, p)
    if case == "constant":
        return classify(EquationSpec(n, Constant(lam)))
    eq = EquationSpec(n, Power(p, lam))
    f = eq.f_expr()
    if case == "linear":
        if n == 1:
            # trigonometric generators fall outside the polynomial ansatz
            basis = catalog(eq)
            return ClassificationResult(n, "power", case, 8, basis, method="catalog")
        basis = _solve_reduced(n, f, function("beta", 0, 2 * n))
        return ClassificationResult(n, "power", case, len(basis) - 1 + 2 * n, basis)
    basis = _solve_n1(f) if n == 1 else _solve_reduced(n, f)
    return ClassificationResult(n, "power", case, len(basis), basis)


def classify(eq: EquationSpec) -> ClassificationResult:
    """Symmetry dimension and a basis for one equation of the family."""
    n, f = eq.n, eq.f
    if isinstance(f, Power):
        return classify_power(n, f.p, f.lam)
    if isinstance(f, Linear):
        return classify_power(n, 1, f.lam)
    if isinstance(f, Symbolic):
        basis = catalog(eq)
        return ClassificationResult(n, "arbitrary", "arbitrary", len(basis), basis, method="catalog")
    family = "exponential" if isinstance(f, Exponential) else "constant"
    fexpr = eq.f_expr()
    basis = _solve_n1(fexpr) if n == 1 else _solve_reduced(n, fexpr)
    return ClassificationResult(n, family, family, len(basis), basis)
