"""Text form of jet expressions.

Grammar (whitespace ignored)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' exponent)?
    exponent:= '-' exponent | primary
    primary := INT | 'x' | yvar | NAME | call | fncall | '(' expr ')'
    yvar    := 'y' "'"* | 'y' '^' '(' INT ')'
    call    := ('exp' | 'sin' | 'cos') '(' expr ')'
    fncall  := NAME ('{' INT '}')? ('^' '(' INT ')')? '(' 'x' ')'

``y^(k)`` with a bare integer k is the k-th derivative; powers of y are
written ``y^2`` or with a non-integer/negative/symbolic exponent in
parentheses (``y^(-2/3)``, ``y^(p+1)``).
"""

from __future__ import annotations

import re
from fractions import Fraction

from .jet import (
    ONE,
    X,
    Y,
    JetExpr,
    Monomial,
    UnsupportedExpression,
    const,
    cos_x,
    exp_x,
    exp_y,
    function,
    jet,
    param,
    sin_x,
)

__all__ = ["parse", "to_text", "ParseError", "format_scale", "format_atom"]

_RESERVED = {"x", "y", "exp", "sin", "cos"}


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<here>{text[pos:]}")
        self.pos = pos
        self.text = text


# --------------------------------------------------------------------------
# printing


def _fmt_num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_power(base: str, e) -> str:
    if e == 1:
        return base
    if isinstance(e, int) or (isinstance(e, Fraction) and e.denominator == 1 and e > 0):
        return f"{base}^{_fmt_num(Fraction(e))}" if e > 0 else f"{base}^({_fmt_num(Fraction(e))})"
    return f"{base}^({_fmt_num(Fraction(e))})"


def _fmt_params(params) -> list:
    return [_fmt_power(name, e) for name, e in params]


def format_scale(s) -> str:
    """Text of a frequency c = r * parameter-monomial."""
    r, ps = s
    parts = _fmt_params(ps)
    if not parts:
        return _fmt_num(r)
    if r == 1:
        return "*".join(parts)
    if r == -1:
        return "-" + "*".join(parts)
    return _fmt_num(r) + "*" + "*".join(parts)


def format_atom(atom: tuple, var: str) -> str:
    if atom[0] == "fn":
        _, name, order, period = atom
        head = name + (f"{{{period}}}" if period else "")
        if order:
            head += f"^({order})"
        return head + "(x)"
    s = format_scale(atom[1])
    arg = var if s == "1" else ("-" + var if s == "-1" else f"{s}*{var}")
    return f"{atom[0]}({arg})"


def _fmt_affine(a) -> str:
    c0, terms = a
    out = ""
    for name, v in terms:
        piece = name if abs(v) == 1 else f"{_fmt_num(abs(v))}*{name}"
        if not out:
            out = ("-" if v < 0 else "") + piece
        else:
            out += ("-" if v < 0 else "+") + piece
    if c0:
        out += ("-" if c0 < 0 else "+") + _fmt_num(abs(c0))
    return out


def _fmt_jet(k: int) -> str:
    return "y" + "'" * k if k <= 3 else f"y^({k})"


def _factors(m: Monomial) -> list:
    out = _fmt_params(m.params)
    if m.xpow:
        out.append(_fmt_power("x", m.xpow))
    c0, terms = m.ypow
    if terms:
        out.append(f"y^({_fmt_affine(m.ypow)})")
    elif c0:
        out.append(_fmt_power("y", c0))
    for k, e in enumerate(m.jets, start=1):
        if e == 1:
            out.append(_fmt_jet(k))
        elif e:
            out.append(f"({_fmt_jet(k)})^{e}")
    if m.xatom:
        out.append(format_atom(m.xatom, "x"))
    if m.yatom:
        out.append(format_atom(m.yatom, "y"))
    return out


def to_text(e: JetExpr) -> str:
    if not e:
        return "0"
    pieces = []
    # highest monomials first reads more naturally
    for m, c in reversed(e.terms()):
        factors = _factors(m)
        mag = abs(c)
        if not factors:
            body = _fmt_num(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _fmt_num(mag) + "*" + "*".join(factors)
        pieces.append(("-" if c < 0 else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("INT", m.group(1), start))
        elif m.group(2):
            toks.append(("NAME", m.group(2), start))
        elif m.group(3).strip():
            toks.append(("OP", m.group(3), start))
        pos = m.end()
    toks.append(("END", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def error(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] != "END":
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            self.error(f"expected {value!r}")

    def parse(self) -> JetExpr:
        e = self.expr()
        if self.peek()[0] != "END":
            self.error("unexpected token")
        return e

    def expr(self) -> JetExpr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self) -> JetExpr:
        e = self.unary()
        while True:
            tok = self.peek()
            if self.accept("*"):
                e = e * self.unary()
            elif self.accept("/"):
                d = self.unary()
                try:
                    e = e / d
                except (UnsupportedExpression, ZeroDivisionError) as exc:
                    self.error(str(exc), tok)
            else:
                return e

    def unary(self) -> JetExpr:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> JetExpr:
        base = self.primary()
        if self.peek()[1] == "^":
            tok = self.peek()
            self.i += 1
            ex = self.exponent()
            try:
                if ex.is_constant() and not ex.params():
                    return base ** ex.constant_value()
                return base ** ex
            except (UnsupportedExpression, ZeroDivisionError, ValueError) as exc:
                self.error(str(exc), tok)
        return base

    def exponent(self) -> JetExpr:
        if self.accept("-"):
            return -self.exponent()
        return self.primary()

    def _deriv_suffix(self):
        """Consume '^' '(' INT ')' if present and return INT."""
        t = [self.peek(k) for k in range(4)]
        if t[0][1] == "^" and t[1][1] == "(" and t[2][0] == "INT" and t[3][1] == ")":
            self.i += 4
            return int(t[2][1])
        return None

    def primary(self) -> JetExpr:
        tok = self.peek()
        kind, val, _ = tok
        if kind == "INT":
            self.i += 1
            return const(int(val))
        if val == "(" and kind == "OP":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if kind != "NAME":
            self.error("unexpected token")
        self.i += 1
        if val == "x":
            return X
        if val == "y":
            k = self._deriv_suffix()
            if k is not None:
                return jet(k)
            primes = 0
            while self.peek()[1] == "'":
                self.i += 1
                primes += 1
            return jet(primes) if primes else Y
        if val in ("exp", "sin", "cos"):
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            try:
                return _atom_call(val, arg)
            except UnsupportedExpression as exc:
                self.error(str(exc), tok)
        # named function of x, or a parameter
        period = None
        if self.peek()[1] == "{":
            self.i += 1
            if self.peek()[0] != "INT":
                self.error("expected period")
            period = int(self.peek()[1])
            self.i += 1
            self.expect("}")
        save = self.i
        order = self._deriv_suffix()
        if self.peek()[1] == "(" and self.peek(1)[1] == "x" and self.peek(2)[1] == ")":
            self.i += 3
            return function(val, order or 0, period)
        if period is not None:
            self.error("expected (x) after function period")
        self.i = save
        return param(val)


def _atom_call(kind: str, arg: JetExpr) -> JetExpr:
    if not arg:
        return const(0) if kind == "sin" else ONE
    m, c = arg.single_term()
    scale_params = m.params
    bare = m.with_(params=())
    factor = JetExpr({Monomial(params=scale_params): c})
    if bare == Monomial(xpow=1):
        builder = {"exp": exp_x, "sin": sin_x, "cos": cos_x}[kind]
        return builder(factor)
    if bare == Monomial(ypow=(Fraction(1), ())) and kind == "exp":
        return exp_y(factor)
    raise UnsupportedExpression(f"unsupported argument {arg} for {kind}")


def parse(text: str) -> JetExpr:
    """Parse the text form into a canonical :class:`JetExpr`."""
    return _Parser(text).parse()
