import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lieode.equation import (
    Constant,
    EquationSpec,
    Exponential,
    Linear,
    Power,
    Symbolic,
    critical_power,
)
from lieode.grammar import parse as P
from lieode.jet import ONE, X, Y, ZERO, UnsupportedExpression, jet, param, xpow
from lieode.symmetry import (
    PointTransformation,
    VectorField,
    apply_transformation,
    catalog,
    d_p,
    invariance_check,
    linear_ansatz_parts,
    prolong,
    prolong_closed_form,
    symmetry_dimension,
)

def _families(n):
    return [
        Power(critical_power(n)),
        Power(7),
        Power(-2),
        Power(Fraction(1, 3)),
        Exponential(),
        Constant(),
        Linear(),
        Symbolic(P("y^3 + y")),
    ]


def test_critical_power():
    assert [critical_power(n) for n in (1, 2, 3, 4)] == [-3, Fraction(-5, 3), Fraction(-7, 5), Fraction(-9, 7)]
    with pytest.raises(ValueError):
        critical_power(0)


def test_vector_field_rejects_jets():
    with pytest.raises(ValueError):
        VectorField(jet(1), ZERO)


def test_text_form_round_trip():
    vf = VectorField.from_text("xi = x^2; eta = 3*x*y", "X3")
    assert vf.xi == xpow(2) and vf.eta == X * Y * 3
    assert VectorField.from_text(vf.to_text()) == VectorField(vf.xi, vf.eta)
    with pytest.raises(ValueError):
        VectorField.from_text("xi = 1")


def test_translation_prolongs_to_zero():
    pf = prolong(VectorField(ONE, ZERO), 6)
    assert all(not pf.zeta(k) for k in range(1, 7))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dp_prolongation(n):
    p = Fraction(5, 2)
    pf = prolong(d_p(n, p), 2 * n)
    for k in range(1, 2 * n + 1):
        assert pf.zeta(k) == jet(k) * ((2 * n + k * (p - 1)) / (1 - p))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_x3_prolongation(n):
    x3 = catalog(EquationSpec(n, Power(critical_power(n))))[2]
    pf = prolong(x3, 2 * n)
    for k in range(1, 2 * n + 1):
        assert pf.zeta(k) == jet(k - 1) * (2 * k * n - k * k) + X * jet(k) * (2 * n - 2 * k - 1)


def test_closed_form_examples():
    n, p = 2, Fraction(3)
    assert prolong_closed_form(X, Fraction(2 * n) / (1 - p), ZERO, 1) == jet(1) * ((2 * n + p - 1) / (1 - p))
    for j, m in [(3, 1), (3, 3), (2, 4)]:
        beta = xpow(j) / math.factorial(j)
        expect = xpow(j - m) / math.factorial(j - m) if m <= j else ZERO
        assert prolong_closed_form(ZERO, ZERO, beta, m) == expect
    # xi = x^2, alpha = (2n-1)x at order 2: (4n-4) y' + (2n-5) x y''
    for n in (1, 2, 3):
        z2 = prolong_closed_form(xpow(2), X * (2 * n - 1), ZERO, 2)
        assert z2 == jet(1) * (4 * n - 4) + X * jet(2) * (2 * n - 5)


def test_closed_form_rejects_y():
    with pytest.raises(UnsupportedExpression):
        prolong_closed_form(Y, ZERO, ZERO, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_closed_form_matches_recursion_on_catalog(n):
    for f in _families(n):
        eq = EquationSpec(n, f)
        for vf in catalog(eq):
            try:
                xi, alpha, beta = linear_ansatz_parts(vf)
            except UnsupportedExpression:
                continue
            pf = prolong(vf, 2 * n)
            for k in range(1, 2 * n + 1):
                assert prolong_closed_form(xi, alpha, beta, k) == pf.zeta(k), (vf.label, k)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_catalog_soundness(n):
    for f in _families(n):
        eq = EquationSpec(n, f)
        for vf in catalog(eq):
            res = invariance_check(vf, eq)
            assert res, (n, f, vf.label, str(res.residual))


def test_invariance_oracles():
    eq = EquationSpec(2, Power(Fraction(-5, 3)))
    x3 = VectorField(xpow(2), X * Y * 3)
    assert invariance_check(x3, eq)
    bad = invariance_check(x3, EquationSpec(2, Power(-2)))
    assert not bad
    assert bad.residual == P("-lambda*x*y^(-2)")
    # numeric sanity check of the residual on sample jets
    direct = bad.residual.evaluate(0.7, [1.9], {"lambda": 1.5})
    assert direct == pytest.approx(-1.5 * 0.7 / 1.9**2)


def test_catalog_examples():
    gens = catalog(EquationSpec(2, Power(Fraction(-5, 3))))
    assert [(g.label, str(g.xi), str(g.eta)) for g in gens] == [
        ("X1", "1", "0"),
        ("X2", "x", "3/2*y"),
        ("X3", "x^2", "3*x*y"),
    ]
    gens = catalog(EquationSpec(3, Power(2)))
    assert [(g.label, str(g.xi), str(g.eta)) for g in gens] == [("X1", "1", "0"), ("Dp", "x", "-6*y")]
    gens = catalog(EquationSpec(2, Constant()))
    assert [g.label for g in gens] == ["X1", "Y1", "Y2", "Y3", "Z0", "Z1", "Z2", "Z3"]
    assert [g.label for g in catalog(EquationSpec(2, Symbolic(P("y^3"))))] == ["X1"]
    assert str(catalog(EquationSpec(2, Exponential()))[1].eta) == "-4*alpha^(-1)"


def test_dimension_counts_vbeta_as_2n():
    assert symmetry_dimension(EquationSpec(3, Linear())) == 1 + 1 + 6
    assert symmetry_dimension(EquationSpec(1, Linear())) == 8
    assert symmetry_dimension(EquationSpec(1, Constant())) == 8
    assert symmetry_dimension(EquationSpec(4, Constant())) == 12


def test_linear_n1_needs_symbolic_lambda():
    with pytest.raises(UnsupportedExpression):
        catalog(EquationSpec(1, Linear(2)))


def test_transformation_examples():
    pts = [(0.3, 1.2), (-1.0, 2.0)]
    assert apply_transformation(PointTransformation("translation", 0.0, 2), pts) == pts
    (x, y), = apply_transformation(PointTransformation("projective", 0.5, 1), [(1.0, 1.0)])
    assert (x, y) == (2.0, 2.0)
    (x, y), = apply_transformation(PointTransformation("scaling", math.log(4), 2), [(1.0, 1.0)])
    assert x == pytest.approx(4.0, rel=1e-15) and y == pytest.approx(8.0, rel=1e-15)


def test_projective_pole_names_sample():
    with pytest.raises(ValueError, match="x = 2"):
        apply_transformation(PointTransformation("projective", 0.5, 1), [(0.0, 1.0), (2.0, 1.0)])
    with pytest.raises(ValueError):
        PointTransformation("rotation", 0.1, 1)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.4, 0.4), st.floats(0.1, 3))
def test_flows_compose(e1, e2, x, y):
    # each one-parameter group satisfies exp(e1 X) exp(e2 X) = exp((e1 + e2) X)
    for kind in ("translation", "scaling"):
        a = apply_transformation(PointTransformation(kind, e2, 2), apply_transformation(PointTransformation(kind, e1, 2), [(x, y)]))
        b = apply_transformation(PointTransformation(kind, e1 + e2, 2), [(x, y)])
        assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-12)
    e1, e2 = e1 / 4, e2 / 4
    t = lambda e: PointTransformation("projective", e, 2)
    a = apply_transformation(t(e2), apply_transformation(t(e1), [(x, y)]))
    b = apply_transformation(t(e1 + e2), [(x, y)])
    assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-12)
