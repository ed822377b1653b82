"""Exact differential polynomials on the jet space of (x, y).

A :class:`JetExpr` is a finite sum of terms.  Each term is an exact rational
coefficient times a :class:`Monomial`, where a monomial collects

* a Laurent monomial in named parameters (``lambda``, ``alpha``, ``mu``, ...),
* a power of ``x`` (integer),
* a power of ``y`` whose exponent is an affine form in the parameters
  (so ``y^(-2/3)`` and ``y^(p+1)`` are both representable),
* powers of the jet variables ``y', y'', ..., y^(k)``,
* at most one transcendental factor in ``x`` (``exp(c*x)``, ``sin(c*x)``,
  ``cos(c*x)`` or a named function ``name^(k)(x)``) and at most one in ``y``
  (``exp(c*y)``).

The parameter ``mu`` is the square root of ``lambda``: ``mu^2`` is rewritten
to ``lambda`` whenever it appears.  A named function may carry a *period*
``P`` meaning it satisfies ``f^(P) = -lambda*f``; derivatives of order ``P``
and above are folded back down during canonicalisation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

__all__ = [
    "JetExpr",
    "Monomial",
    "UnsupportedExpression",
    "Number",
    "ZERO",
    "ONE",
    "X",
    "Y",
    "const",
    "param",
    "jet",
    "xpow",
    "ypow",
    "exp_x",
    "exp_y",
    "sin_x",
    "cos_x",
    "function",
]

Number = Union[int, Fraction]
Params = tuple  # tuple[tuple[str, int], ...], sorted by name, no zero exponents
Affine = tuple  # (Fraction, tuple[tuple[str, Fraction], ...])
Scale = tuple  # (Fraction, Params): a rational times a parameter monomial

_NO_PARAMS: Params = ()
_ZERO_AFFINE: Affine = (Fraction(0), ())


class UnsupportedExpression(ValueError):
    """Raised when a result would leave the representable term algebra."""


# --------------------------------------------------------------------------
# parameter monomials


def _mul_params(a: Params, b: Params) -> Params:
    if not b:
        return a
    if not a:
        return b
    exps = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return _norm_params(exps)


def _norm_params(exps: dict) -> Params:
    mu = exps.get("mu", 0)
    if mu and not 0 <= mu < 2:
        q, r = divmod(mu, 2)
        exps["mu"] = r
        exps["lambda"] = exps.get("lambda", 0) + q
    return tuple(sorted((k, v) for k, v in exps.items() if v))


def _pow_params(a: Params, q: Fraction) -> Params:
    exps = {}
    for name, e in a:
        v = e * q
        if v.denominator != 1:
            raise UnsupportedExpression(f"non-integer power of parameter {name}")
        exps[name] = int(v)
    return _norm_params(exps)


def _inv_params(a: Params) -> Params:
    return tuple((k, -v) for k, v in a)


# --------------------------------------------------------------------------
# affine exponents of y


def _affine(c: Number, terms: Iterable = ()) -> Affine:
    return (Fraction(c), tuple(sorted((k, Fraction(v)) for k, v in terms if v)))


def _add_affine(a: Affine, b: Affine) -> Affine:
    if not b[1] and not a[1]:
        return (a[0] + b[0], ())
    coefs = dict(a[1])
    for k, v in b[1]:
        coefs[k] = coefs.get(k, 0) + v
    return _affine(a[0] + b[0], coefs.items())


def _scale_affine(a: Affine, q: Fraction) -> Affine:
    return _affine(a[0] * q, ((k, v * q) for k, v in a[1]))


# --------------------------------------------------------------------------
# monomials


class Monomial(NamedTuple):
    params: Params = ()
    xpow: int = 0
    ypow: Affine = _ZERO_AFFINE
    jets: tuple = ()  # exponents of y', y'', ... (index 0 is y')
    xatom: tuple = ()
    yatom: tuple = ()

    @property
    def order(self) -> int:
        """Highest jet order present (0 when only x, y appear)."""
        return len(self.jets)

    def jet_exponent(self, k: int) -> int:
        if k == 0:
            raise ValueError("use ypow for the order-zero variable")
        return self.jets[k - 1] if k <= len(self.jets) else 0

    def is_constant(self) -> bool:
        return (
            self.xpow == 0
            and self.ypow == _ZERO_AFFINE
            and not self.jets
            and not self.xatom
            and not self.yatom
        )

    def depends_on_y(self) -> bool:
        return self.ypow != _ZERO_AFFINE or bool(self.yatom) or bool(self.jets)

    def sort_key(self):
        # graded: total jet order, jet exponents, x power, y power, atoms, params
        return (self.order, self.jets, self.xpow, self.ypow, self.xatom, self.yatom, self.params)

    def with_(self, **kw) -> "Monomial":
        return self._replace(**kw)


_ONE_MONO = Monomial()


def _set_jet(jets: tuple, k: int, m: int) -> tuple:
    lst = list(jets)
    while len(lst) < k:
        lst.append(0)
    lst[k - 1] = m
    while lst and lst[-1] == 0:
        lst.pop()
    return tuple(lst)


def _add_jets(a: tuple, b: tuple) -> tuple:
    if not b:
        return a
    if not a:
        return b
    if len(a) < len(b):
        a, b = b, a
    return tuple(u + (b[i] if i < len(b) else 0) for i, u in enumerate(a))


# --------------------------------------------------------------------------
# transcendental atoms
#
#   ("exp", scale) ("sin", scale) ("cos", scale)    in x
#   ("fn", name, order, period)                     named function of x
#   ("exp", scale)                                  in y (yatom slot)


def _scale_neg(s: Scale) -> Scale:
    return (-s[0], s[1])


def _scale_add(a: Scale, b: Scale) -> Scale:
    if a[1] != b[1]:
        raise UnsupportedExpression(
            f"cannot combine atom frequencies {_fmt_scale(a)} and {_fmt_scale(b)}"
        )
    return (a[0] + b[0], a[1])


def _norm_xatom(atom: tuple):
    """Return (sign, extra params, atom) or None when the atom vanishes."""
    if not atom:
        return Fraction(1), _NO_PARAMS, ()
    kind = atom[0]
    if kind == "fn":
        _, name, order, period = atom
        sign, extra = Fraction(1), _NO_PARAMS
        if period:
            while order >= period:
                order -= period
                sign = -sign
                extra = _mul_params(extra, (("lambda", 1),))
        return sign, extra, ("fn", name, order, period)
    scale = atom[1]
    if scale[0] == 0:
        if kind == "sin":
            return None
        return Fraction(1), _NO_PARAMS, ()
    if kind in ("sin", "cos") and scale[0] < 0:
        sign = Fraction(-1) if kind == "sin" else Fraction(1)
        return sign, _NO_PARAMS, (kind, _scale_neg(scale))
    return Fraction(1), _NO_PARAMS, atom


def _norm_yatom(atom: tuple):
    if atom and atom[1][0] == 0:
        return ()
    return atom


def _mul_xatoms(a: tuple, b: tuple) -> list:
    """Product of two x-atoms as a list of (coefficient, atom)."""
    if not a:
        return [(Fraction(1), b)]
    if not b:
        return [(Fraction(1), a)]
    ka, kb = a[0], b[0]
    if ka == "exp" and kb == "exp":
        return [(Fraction(1), ("exp", _scale_add(a[1], b[1])))]
    if ka in ("sin", "cos") and kb in ("sin", "cos"):
        s, t = a[1], b[1]
        plus, minus = _scale_add(s, t), _scale_add(s, _scale_neg(t))
        half = Fraction(1, 2)
        if ka == "sin" and kb == "sin":
            return [(half, ("cos", minus)), (-half, ("cos", plus))]
        if ka == "cos" and kb == "cos":
            return [(half, ("cos", minus)), (half, ("cos", plus))]
        if ka == "sin":  # sin(s) cos(t)
            return [(half, ("sin", plus)), (half, ("sin", minus))]
        return [(half, ("sin", plus)), (-half, ("sin", minus))]  # cos(s) sin(t)
    raise UnsupportedExpression(f"product of atoms {_fmt_xatom(a)} and {_fmt_xatom(b)}")


def _mul_yatoms(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return ("exp", _scale_add(a[1], b[1]))


# --------------------------------------------------------------------------
# the expression type


def _accumulate(acc: dict, coeff: Fraction, mono: Monomial) -> None:
    """Add coeff*mono to acc, normalising atoms first."""
    if not coeff:
        return
    normed = _norm_xatom(mono.xatom)
    if normed is None:
        return
    sign, extra, xatom = normed
    yatom = _norm_yatom(mono.yatom)
    params = _mul_params(mono.params, extra) if extra else mono.params
    if xatom is not mono.xatom or yatom is not mono.yatom or params is not mono.params:
        mono = mono._replace(xatom=xatom, yatom=yatom, params=params)
    coeff = coeff * sign
    new = acc.get(mono, 0) + coeff
    if new:
        acc[mono] = new
    else:
        acc.pop(mono, None)


class JetExpr:
    """Immutable canonical sum of terms; see the module docstring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        # ``terms`` is trusted to be canonical; use ``from_terms`` otherwise.
        items = sorted((terms or {}).items(), key=lambda kv: kv[0].sort_key())
        self._terms = tuple(items)
        self._hash = None

    @classmethod
    def from_terms(cls, terms: Iterable) -> "JetExpr":
        acc: dict = {}
        for mono, coeff in terms:
            _accumulate(acc, Fraction(coeff), mono)
        return cls(acc)

    # -- inspection --------------------------------------------------------

    def terms(self) -> tuple:
        """Canonical (monomial, coefficient) pairs in ascending monomial order."""
        return self._terms

    def __iter__(self) -> Iterator:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def order(self) -> int:
        """Highest jet order; -1 for the zero expression."""
        if not self._terms:
            return -1
        return max(m.order for m, _ in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m.is_constant() for m, _ in self._terms)

    def depends_on_y(self) -> bool:
        return any(m.depends_on_y() for m, _ in self._terms)

    def params(self) -> set:
        out = set()
        for m, _ in self._terms:
            out.update(k for k, _ in m.params)
            out.update(k for k, _ in m.ypow[1])
            for atom in (m.xatom, m.yatom):
                if atom and atom[0] != "fn":
                    out.update(k for k, _ in atom[1][1])
        return out

    def constant_value(self) -> Fraction:
        """The value of a parameter-free constant expression."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and self._terms[0][0] == _ONE_MONO:
            return self._terms[0][1]
        raise ValueError(f"{self} is not a rational constant")

    def single_term(self) -> tuple:
        if len(self._terms) != 1:
            raise UnsupportedExpression(f"expected a single term, got {self}")
        return self._terms[0]

    def split(self, key) -> dict:
        """Group terms by ``key(monomial)``; values are JetExprs."""
        groups: dict = {}
        for m, c in self._terms:
            groups.setdefault(key(m), {})[m] = c
        return {k: JetExpr(v) for k, v in groups.items()}

    def map_terms(self, fn) -> "JetExpr":
        """Rebuild from ``fn(monomial, coeff) -> iterable of (mono, coeff)``."""
        acc: dict = {}
        for m, c in self._terms:
            for m2, c2 in fn(m, c):
                _accumulate(acc, Fraction(c2), m2)
        return JetExpr(acc)

    def drop_constant(self) -> "JetExpr":
        return JetExpr({m: c for m, c in self._terms if not m.is_constant()})

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def coerce(other) -> "JetExpr":
        if isinstance(other, JetExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return const(other)
        if isinstance(other, str):
            from .grammar import parse

            return parse(other)
        raise TypeError(f"cannot convert {type(other).__name__} to JetExpr")

    def __add__(self, other) -> "JetExpr":
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        acc = dict(self._terms)
        for m, c in other._terms:
            new = acc.get(m, 0) + c
            if new:
                acc[m] = new
            else:
                del acc[m]
        return JetExpr(acc)

    __radd__ = __add__

    def __neg__(self) -> "JetExpr":
        return JetExpr({m: -c for m, c in self._terms})

    def __sub__(self, other) -> "JetExpr":
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "JetExpr":
        return JetExpr.coerce(other) - self

    def __mul__(self, other) -> "JetExpr":
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            return JetExpr({m: c * other for m, c in self._terms})
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        acc: dict = {}
        for m1, c1 in self._terms:
            for m2, c2 in other._terms:
                for c, m in _mul_monomials(m1, m2):
                    _accumulate(acc, c1 * c2 * c, m)
        return JetExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, q) -> "JetExpr":
        if isinstance(q, JetExpr):
            return _pow_symbolic(self, q)
        q = Fraction(q)
        if q.denominator == 1 and q >= 0:
            result, base, k = ONE, self, int(q)
            while k:
                if k & 1:
                    result = result * base
                k >>= 1
                if k:
                    base = base * base
            return result
        return _pow_single(self, q)

    def __truediv__(self, other) -> "JetExpr":
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self * (other ** -1)

    def __rtruediv__(self, other) -> "JetExpr":
        return JetExpr.coerce(other) / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, JetExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # -- numeric evaluation ------------------------------------------------

    def evaluate(self, x: float, jets, params: Mapping[str, float] | None = None) -> float:
        """Evaluate at a point; ``jets[k]`` is the value of y^(k)."""
        return self.lambdify(params)(x, jets)

    def lambdify(self, params: Mapping[str, float] | None = None):
        """Compile to ``f(x, jets) -> float`` with parameters fixed."""
        params = dict(params or {})
        if "mu" not in params and "lambda" in params and params["lambda"] >= 0:
            params["mu"] = math.sqrt(params["lambda"])
        compiled = []
        for m, c in self._terms:
            k = float(c) * _eval_params(m.params, params)
            q = m.ypow[0] + sum((v * Fraction(params[n]) for n, v in m.ypow[1]), Fraction(0))
            compiled.append((k, m.xpow, float(q), m.jets, _eval_atom(m.xatom, params), _eval_atom(m.yatom, params)))

        def fn(x, jets):
            total = 0.0
            for k, xp, q, js, xa, ya in compiled:
                v = k
                if xp:
                    v *= x**xp
                if q:
                    v *= jets[0] ** q
                for i, e in enumerate(js):
                    if e:
                        v *= jets[i + 1] ** e
                if xa is not None:
                    v *= xa(x)
                if ya is not None:
                    v *= ya(jets[0])
                total += v
            return total

        return fn

    # -- text --------------------------------------------------------------

    def __str__(self) -> str:
        from .grammar import to_text

        return to_text(self)

    def __repr__(self) -> str:
        return f"JetExpr({str(self)!r})"


def _eval_params(p: Params, values: Mapping[str, float]) -> float:
    v = 1.0
    for name, e in p:
        try:
            v *= float(values[name]) ** e
        except KeyError:
            raise ValueError(f"no numeric value for parameter {name!r}") from None
    return v


def _eval_atom(atom: tuple, values):
    if not atom:
        return None
    kind = atom[0]
    if kind == "fn":
        raise ValueError(f"cannot evaluate unknown function {atom[1]}")
    w = float(atom[1][0]) * _eval_params(atom[1][1], values)
    return {"exp": lambda t: math.exp(w * t), "sin": lambda t: math.sin(w * t), "cos": lambda t: math.cos(w * t)}[kind]


def _mul_monomials(a: Monomial, b: Monomial) -> list:
    if a == _ONE_MONO:
        return [(Fraction(1), b)]
    if b == _ONE_MONO:
        return [(Fraction(1), a)]
    params = _mul_params(a.params, b.params)
    xpow = a.xpow + b.xpow
    ypow = _add_affine(a.ypow, b.ypow) if (a.ypow[0] or a.ypow[1] or b.ypow[0] or b.ypow[1]) else _ZERO_AFFINE
    jets = _add_jets(a.jets, b.jets)
    yatom = _mul_yatoms(a.yatom, b.yatom)
    return [
        (c, Monomial(params, xpow, ypow, jets, xatom, yatom))
        for c, xatom in _mul_xatoms(a.xatom, b.xatom)
    ]


def _pow_single(e: JetExpr, q: Fraction) -> JetExpr:
    if not e:
        raise ZeroDivisionError("power of zero expression")
    m, c = e.single_term()
    if q.denominator != 1:
        # rational powers only of a unit coefficient (c = 1) or a perfect power
        num = _rational_root(c, q)
    else:
        num = c ** int(q)
    if m.xatom:
        raise UnsupportedExpression(f"power {q} of {_fmt_xatom(m.xatom)}")
    xp = m.xpow * q
    if xp.denominator != 1:
        raise UnsupportedExpression("non-integer power of x")
    jets = tuple(j * q for j in m.jets)
    if any(j.denominator != 1 or j < 0 for j in jets):
        raise UnsupportedExpression("jet variables must carry non-negative integer powers")
    yatom = ("exp", (m.yatom[1][0] * q, m.yatom[1][1])) if m.yatom else ()
    mono = Monomial(_pow_params(m.params, q), int(xp), _scale_affine(m.ypow, q), tuple(int(j) for j in jets), (), yatom)
    return JetExpr.from_terms([(mono, num)])


def _pow_symbolic(e: JetExpr, q: JetExpr) -> JetExpr:
    """y^q with q an affine combination of parameters."""
    aff = to_affine(q)
    if not aff[1]:
        return e ** aff[0]
    if e != Y:
        raise UnsupportedExpression("symbolic exponents are supported on y only")
    return JetExpr({Monomial(ypow=aff): Fraction(1)})


def to_affine(q: JetExpr) -> Affine:
    """Read an expression of the form c0 + sum c_i*p_i as an affine exponent."""
    c0 = Fraction(0)
    coefs = {}
    for m, c in q.terms():
        if m.is_constant() and not m.params:
            c0 += c
        elif m.is_constant() and len(m.params) == 1 and m.params[0][1] == 1:
            coefs[m.params[0][0]] = c
        else:
            raise UnsupportedExpression(f"exponent {q} is not affine in the parameters")
    return _affine(c0, coefs.items())


def _rational_root(c: Fraction, q: Fraction) -> Fraction:
    num = _int_root(c.numerator, q.denominator)
    den = _int_root(c.denominator, q.denominator)
    if num is None or den is None:
        raise UnsupportedExpression(f"coefficient {c} has no exact power {q}")
    return Fraction(num, den) ** q.numerator


def _int_root(v: int, k: int):
    if v < 0:
        if k % 2 == 0:
            return None
        r = _int_root(-v, k)
        return None if r is None else -r
    r = round(v ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == v:
            return cand
    return None


# --------------------------------------------------------------------------
# constructors


def const(c: Number) -> JetExpr:
    c = Fraction(c)
    return JetExpr({_ONE_MONO: c}) if c else JetExpr()


def param(name: str, power: int = 1) -> JetExpr:
    return JetExpr.from_terms([(Monomial(params=_norm_params({name: power})), 1)])


def jet(k: int) -> JetExpr:
    """The jet variable y^(k); ``jet(0)`` is y itself."""
    if k < 0:
        raise ValueError("jet order must be non-negative")
    if k == 0:
        return Y
    return JetExpr({Monomial(jets=_set_jet((), k, 1)): Fraction(1)})


def xpow(a: int) -> JetExpr:
    return JetExpr({Monomial(xpow=a): Fraction(1)})


def ypow(q) -> JetExpr:
    if isinstance(q, JetExpr):
        return Y ** q
    q = Fraction(q)
    if not q:
        return ONE
    return JetExpr({Monomial(ypow=(q, ())): Fraction(1)})


def _as_scale(c) -> Scale:
    if isinstance(c, (int, Fraction)):
        return (Fraction(c), _NO_PARAMS)
    if isinstance(c, str):
        return (Fraction(1), ((c, 1),))
    m, k = JetExpr.coerce(c).single_term()
    if not m.is_constant():
        raise UnsupportedExpression(f"atom frequency must be a constant, got {c}")
    return (k, m.params)


def exp_x(c=1) -> JetExpr:
    return JetExpr.from_terms([(Monomial(xatom=("exp", _as_scale(c))), 1)])


def sin_x(c=1) -> JetExpr:
    return JetExpr.from_terms([(Monomial(xatom=("sin", _as_scale(c))), 1)])


def cos_x(c=1) -> JetExpr:
    return JetExpr.from_terms([(Monomial(xatom=("cos", _as_scale(c))), 1)])


def exp_y(c=1) -> JetExpr:
    return JetExpr.from_terms([(Monomial(yatom=("exp", _as_scale(c))), 1)])


def function(name: str, order: int = 0, period: int | None = None) -> JetExpr:
    """A named function of x, optionally obeying f^(period) = -lambda*f."""
    return JetExpr.from_terms([(Monomial(xatom=("fn", name, order, period or 0)), 1)])


# --------------------------------------------------------------------------
# formatting helpers shared with grammar


def _fmt_scale(s: Scale) -> str:
    from .grammar import format_scale

    return format_scale(s)


def _fmt_xatom(a: tuple) -> str:
    from .grammar import format_atom

    return format_atom(a, "x")


ZERO = JetExpr()
ONE = JetExpr({_ONE_MONO: Fraction(1)})
X = JetExpr({Monomial(xpow=1): Fraction(1)})
Y = JetExpr({Monomial(ypow=(Fraction(1), ())): Fraction(1)})
