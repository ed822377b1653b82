"""Hypothesis strategies for small jet expressions and point fields."""

from fractions import Fraction

from hypothesis import strategies as st

from lieode.jet import ONE, const, cos_x, exp_x, exp_y, jet, param, sin_x, xpow, ypow

coefficients = st.builds(
    Fraction, st.integers(-4, 4).filter(bool), st.sampled_from([1, 2, 3])
)

# y powers that keep antiderivatives inside the term algebra
y_powers = st.sampled_from([Fraction(0), Fraction(1), Fraction(2), Fraction(3), Fraction(-1), Fraction(-2), Fraction(1, 2)])

# pools closed under multiplication (exp and trig atoms do not mix)
TRIG = [ONE, ONE, sin_x(2), cos_x(1)]
EXP = [ONE, ONE, exp_x(1), exp_x(-2)]
ANY = [ONE, ONE, ONE, exp_x(1), sin_x(2), cos_x(1)]


@st.composite
def monomials(draw, max_order=3, atoms=True, pool=ANY):
    term = const(draw(coefficients)) * xpow(draw(st.integers(0, 2)))
    if draw(st.booleans()) and atoms:
        term = term * exp_y(param("alpha"))
    else:
        term = term * ypow(draw(y_powers))
    for k in range(1, max_order + 1):
        term = term * jet(k) ** draw(st.integers(0, 2 if k < max_order else 1))
    if atoms:
        term = term * draw(st.sampled_from(pool))
    term = term * param("lambda", draw(st.integers(-1, 1)))
    return term


@st.composite
def expressions(draw, max_order=3, max_terms=3, atoms=True, pool=None):
    pool = pool or draw(st.sampled_from([TRIG, EXP]))
    out = const(0)
    for _ in range(draw(st.integers(1, max_terms))):
        out = out + draw(monomials(max_order, atoms, pool))
    return out


@st.composite
def point_fields(draw):
    """Small polynomial xi(x, y), eta(x, y)."""
    from lieode.symmetry import VectorField

    def poly():
        out = const(0)
        for _ in range(draw(st.integers(0, 3))):
            out = out + const(draw(coefficients)) * xpow(draw(st.integers(0, 2))) * ypow(draw(st.integers(0, 2)))
        return out

    return VectorField(poly(), poly())
