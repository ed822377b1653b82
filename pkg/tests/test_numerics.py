import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lieode.equation import EquationSpec, Symbolic, critical_power
from lieode.jet import Y, ZERO, param
from lieode.noether import combination_template, first_integral_catalog
from lieode.numerics import (
    DomainError,
    SolutionFamily,
    amplitude,
    closure_residual,
    default_tol,
    drift,
    drift_report,
    eval_family,
    evaluate_along,
    fit_family,
    integrate,
)
from lieode.symmetry import PointTransformation

LAM = {1: 1.0, 2: -1.0, 3: 1.0}


def _unit(n):
    return SolutionFamily(n, LAM[n], 1.0, 0.0, -1.0)


def test_amplitude_oracles():
    assert amplitude(1, 1, 1, 0, -1) == 1.0
    assert amplitude(1, 3, 2, 1, -1) == pytest.approx((3 / 3) ** 0.25, rel=1e-12)
    assert amplitude(1, 2, 1, 0, -3) == pytest.approx((2 / 3) ** 0.25, rel=1e-12)
    assert amplitude(2, -1, 1, 0, -2) == pytest.approx((1 / (9 * 4)) ** (3 / 8), rel=1e-12)


def test_sign_constraint_is_eager():
    with pytest.raises(DomainError):
        SolutionFamily(2, 1.0, 1.0, 0.0, -1.0)
    with pytest.raises(DomainError):
        SolutionFamily(1, 1.0, 1.0, 1.0, 1.0)


def test_eval_family_oracles():
    fam = _unit(1)
    assert eval_family(fam, 0.0)[0] == 1.0
    y, dy, d2y = eval_family(fam, 0.5)
    assert y == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert abs(d2y + y**-3) < 1e-12
    with pytest.raises(DomainError, match="x = 1"):
        eval_family(fam, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_family_derivatives_against_finite_differences(n):
    fam = _unit(n)
    h = 1e-4
    for x in (-0.4, 0.1, 0.6):
        lo, mid, hi = eval_family(fam, x - h), eval_family(fam, x), eval_family(fam, x + h)
        for k in range(2 * n):
            fd = (hi[k] - lo[k]) / (2 * h)
            assert fd == pytest.approx(mid[k + 1], rel=1e-6, abs=1e-6)


def test_validity_interval():
    assert _unit(1).validity_interval() == (-1.0, 1.0)
    assert SolutionFamily(1, -1.0, 1.0, 0.0, 1.0).validity_interval() == (-math.inf, math.inf)


def test_integrate_matches_exact_n1():
    fam = _unit(1)
    traj = integrate(fam.equation(), eval_family(fam, 0.0, 1), (0.0, 0.9), 1e-10)
    assert traj.complete
    err = max(abs(row[0] - eval_family(fam, x, 0)[0]) for x, row in zip(traj.xs, traj.states))
    assert err < 1e-8
    assert np.all(np.diff(traj.xs) > 0)
    assert traj.states.shape[1] == 2


def test_integrate_matches_exact_n2():
    fam = _unit(2)
    traj = integrate(fam.equation(), eval_family(fam, -0.5, 3), (-0.5, 0.5), 1e-10)
    err = max(abs(row[0] - eval_family(fam, x, 0)[0]) for x, row in zip(traj.xs, traj.states))
    assert err < 1e-7


def test_free_equation_constant_solution():
    eq = EquationSpec(2, Symbolic(ZERO))
    traj = integrate(eq, [1, 0, 0, 0], (0, 3), 1e-10)
    assert np.all(traj.states[:, 0] == 1.0)
    assert drift(traj, Y) == 0.0


def test_floor_stops_with_partial_trajectory():
    fam = _unit(1)
    traj = integrate(fam.equation(), eval_family(fam, 0.0, 1), (0.0, 1.5), 1e-10, floor=1e-2)
    assert traj.status == "floor"
    assert 0.99 < traj.xs[-1] < 1.0
    assert "below floor" in traj.message


def test_domain_errors():
    eq = _unit(1).equation()
    with pytest.raises(DomainError):
        integrate(eq, [1.0], (0, 1))
    with pytest.raises(DomainError):
        integrate(eq, [1.0, 0.0], (1, 0))
    with pytest.raises(DomainError, match="lambda"):
        integrate(EquationSpec(1, Symbolic(Y * Y * param("lambda"))), [1, 0], (0, 1))


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.delenv("LIEODE_TOL", raising=False)
    assert default_tol() == 1e-10
    monkeypatch.setenv("LIEODE_TOL", "1e-6")
    assert default_tol() == 1e-6
    monkeypatch.setenv("LIEODE_TOL", "zero")
    with pytest.raises(DomainError):
        default_tol()


def test_csv_export():
    fam = _unit(2)
    traj = integrate(fam.equation(), eval_family(fam, 0.0, 3), (0.0, 0.2), 1e-8)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "x,y0,y1,y2,y3,err"
    assert len(lines) == len(traj) + 1
    assert [float(v) for v in lines[1].split(",")][:2] == [0.0, traj.states[0, 0]]


def test_drift_on_exact_samples():
    fam = _unit(1)
    from lieode.numerics import Trajectory

    xs = np.linspace(-0.8, 0.8, 50)
    states = np.array([eval_family(fam, x, 1) for x in xs])
    traj = Trajectory(fam.equation(), xs, states, np.zeros_like(xs))
    assert drift(traj, first_integral_catalog(1, 1)["I1"]) < 1e-8


def test_drift_report_json():
    fam = _unit(1)
    traj = integrate(fam.equation(), eval_family(fam, 0.0, 1), (0.0, 0.5), 1e-10)
    report = json.loads(drift_report(traj, first_integral_catalog(1, 1)))
    assert set(report["drift"]) == {"I1", "I2", "I3"}
    assert report["status"] == "ok"


def test_integrated_drift_n2():
    fam = _unit(2)
    traj = integrate(fam.equation(), eval_family(fam, -0.5, 3), (-0.5, 0.5), 1e-10)
    assert drift(traj, first_integral_catalog(2, -1)["I2"]) < 1e-6


def test_convergence_with_tolerance():
    errors = {}
    for tol in (1e-6, 1e-6 / 16):
        total = 0.0
        for n in (1, 2):
            fam = _unit(n)
            traj = integrate(fam.equation(), eval_family(fam, -0.5, 2 * n - 1), (-0.5, 0.5), tol)
            total += max(abs(row[0] - eval_family(fam, x, 0)[0]) for x, row in zip(traj.xs, traj.states))
        errors[tol] = total
    assert errors[1e-6 / 16] < errors[1e-6]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_combination_along_trajectory(n):
    fam = _unit(n)
    lam = LAM[n]
    traj = integrate(fam.equation(), eval_family(fam, -0.5, 2 * n - 1), (-0.5, 0.5), 1e-10)
    ints = first_integral_catalog(n, lam)
    c = {k: evaluate_along(traj, I.expr)[0] for k, I in ints.items()}
    xs = traj.xs
    combo = xs**2 * evaluate_along(traj, ints["I1"].expr) - 2 * xs * evaluate_along(traj, ints["I2"].expr) + evaluate_along(traj, ints["I3"].expr)
    # pointwise identity with the template, and consistency with the frozen integral values
    assert np.max(np.abs(combo + evaluate_along(traj, combination_template(n)))) < 1e-8
    assert np.max(np.abs(combo - (xs**2 * c["I1"] - 2 * xs * c["I2"] + c["I3"]))) < 1e-6
    if n == 1:
        assert np.max(np.abs(combo + traj.states[:, 0] ** 2 / 2)) < 1e-8


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("kind, eps", [("translation", 0.1), ("scaling", 0.3), ("projective", 0.2), ("projective", -0.3)])
def test_family_closure(n, kind, eps):
    fam = _unit(n)
    _, residual = closure_residual(fam, PointTransformation(kind, eps, n), np.linspace(-0.5, 0.5, 21))
    assert residual < 1e-8


@given(st.floats(0.5, 2.0), st.floats(-0.3, 0.3), st.floats(-2.0, -0.5))
def test_fit_recovers_member(alpha, beta, gamma):
    fam = SolutionFamily(1, 1.0 * (beta * beta - alpha * gamma), alpha, beta, gamma)
    lo, hi = fam.validity_interval()
    xs = np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), 15)
    fitted = fit_family(1, fam.lam, [(x, eval_family(fam, x, 0)[0]) for x in xs])
    for x in xs:
        assert eval_family(fitted, x, 0)[0] == pytest.approx(eval_family(fam, x, 0)[0], rel=1e-9)
