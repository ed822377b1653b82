import json
from fractions import Fraction
import subprocess
import sys

import pytest

from lieode.cli import main, parse_fspec
from lieode.equation import Constant, Exponential, Linear, Power, Symbolic
from lieode.grammar import parse


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out) if out else None


def test_fspec_forms():
    assert parse_fspec("power:p=-5/3,lambda=sym") == Power(Fraction(-5, 3))
    assert parse_fspec("power:p=2,lambda=3").lam == 3
    assert parse_fspec("exp:alpha=2") == Exponential(2)
    assert parse_fspec("const") == Constant()
    assert parse_fspec("linear:lambda=-1") == Linear(-1)
    assert parse_fspec("expr:y^3") == Symbolic(parse("y^3"))


def test_classify_critical(capsys):
    code, report = run_json(capsys, "classify", "--n", "2", "--f", "power:p=-5/3,lambda=sym")
    assert code == 0
    assert [g["label"] for g in report["generators"]] == ["X1", "X2", "X3"]
    assert report["dimension"] == 3
    assert report["verified"] is True


def test_noether_x3(capsys):
    code, report = run_json(capsys, "noether", "--n", "2", "--f", "power:p=-5/3,lambda=sym", "--generator", "X3")
    assert code == 0
    assert report["kind"] == "Divergence"
    assert report["gauge"] == "2*(y')^2"


def test_noether_falsified(capsys):
    code, report = run_json(capsys, "noether", "--n", "2", "--f", "power:p=-2", "--generator", "Dp")
    assert code == 1
    assert report["kind"] == "NotNoether"
    assert "residual" in report


def test_check_symmetry(capsys):
    code, out, _ = run(capsys, "check-symmetry", "--n", "1", "--f", "expr:0", "--generator", "xi=1;eta=0")
    assert code == 0 and "symmetry" in out
    code, report = run_json(capsys, "check-symmetry", "--n", "2", "--f", "power:p=-2", "--generator", "xi=x^2;eta=3*x*y")
    assert code == 1
    assert report["holds"] is False
    assert report["residual"] == "-lambda*x*y^(-2)"


def test_first_integrals(capsys):
    code, report = run_json(capsys, "first-integrals", "--n", "1")
    assert code == 0
    assert report["integrals"]["I1"]["expr"] == "-1/2*(y')^2 + 1/2*lambda*y^(-2)"
    assert report["integrals"]["I3"]["gauge"] == "1/2*y^2"
    assert all(v["conserved"] and v["matches_synthesis"] for v in report["integrals"].values())


def test_solve_and_csv(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    code, report = run_json(
        capsys, "solve", "--n", "2", "--lambda", "-1", "--alpha", "1", "--beta", "0", "--gamma", "-1",
        "--span", "-0.5", "0.5", "--tol", "1e-10", "--csv", str(path),
    )
    assert code == 0
    assert report["max_error"] < 1e-7
    assert path.read_text().splitlines()[0] == "x,y0,y1,y2,y3,err"


def test_drift(capsys):
    code, report = run_json(capsys, "drift", "--n", "1", "--lambda", "1", "--family", "1", "0", "-1", "--span", "-0.5", "0.5")
    assert code == 0
    assert max(report["drift"].values()) < 1e-6
    code, report = run_json(capsys, "drift", "--n", "1", "--lambda", "1", "--ics", "1", "0", "--span", "0", "0.5", "--integral", "I1")
    assert code == 0 and list(report["drift"]) == ["I1"]


def test_drift_falsified_by_threshold(capsys):
    code, report = run_json(
        capsys, "drift", "--n", "1", "--lambda", "1", "--family", "1", "0", "-1", "--span", "-0.5", "0.5",
        "--tol", "1e-3", "--threshold", "1e-14",
    )
    assert code == 1 and report["verified"] is False


def test_transform(capsys):
    code, report = run_json(capsys, "transform", "--n", "1", "--kind", "projective", "--epsilon", "1/2", "--points", "1,1")
    assert code == 0 and report["points"] == [[2.0, 2.0]]


@pytest.mark.parametrize(
    "argv",
    [
        ["transform", "--n", "1", "--kind", "projective", "--epsilon", "1", "--points", "1,1"],
        ["check-symmetry", "--n", "1", "--f", "expr:y^", "--generator", "X1"],
        ["classify", "--n", "2", "--f", "cubic"],
        ["noether", "--n", "2", "--f", "const", "--generator", "X9"],
        ["solve", "--n", "2", "--lambda", "1", "--alpha", "1", "--beta", "0", "--gamma", "-1", "--span", "0", "1"],
        ["solve", "--n", "1", "--alpha", "1", "--beta", "0", "--gamma", "-1", "--span", "0", "1"],
        ["noether", "--n", "2", "--f", "power:p=-1", "--generator", "X1"],
    ],
)
def test_usage_and_domain_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("lieode:")


def test_parse_error_has_position(capsys):
    _, _, err = run(capsys, "check-symmetry", "--n", "1", "--f", "expr:y^", "--generator", "X1")
    assert "position" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["classify", "--n", "2"])
    assert info.value.code == 2


def test_json_is_deterministic(capsys):
    argv = ["classify", "--n", "3", "--f", "const", "--format", "json"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_printed_expressions_reparse(capsys):
    _, report = run_json(capsys, "classify", "--n", "2", "--f", "const")
    for g in report["generators"] + report["solver"]:
        for key in ("xi", "eta"):
            assert str(parse(g[key])) == g[key]
    _, report = run_json(capsys, "first-integrals", "--n", "3")
    for entry in report["integrals"].values():
        assert str(parse(entry["expr"])) == entry["expr"]


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "lieode.cli", "noether", "--n", "1", "--f", "power:p=-3", "--generator", "X2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "X2: Variational"
