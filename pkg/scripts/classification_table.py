"""Print the symmetry dimension table and the Noether verdicts for n = 1..N.

    python scripts/classification_table.py --max-n 5
"""

import argparse
import time
from fractions import Fraction

from lieode import (
    Constant,
    EquationSpec,
    Exponential,
    Linear,
    Power,
    Symbolic,
    catalog,
    classify,
    critical_power,
    invariance_check,
    noether_check,
    parse,
)


def families(n):
    return [
        ("arbitrary", Symbolic(parse("y^3 + y^2"))),
        ("power p=7", Power(7)),
        ("critical", Power(critical_power(n))),
        ("exponential", Exponential()),
        ("constant", Constant()),
        ("linear", Linear()),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=4)
    args = ap.parse_args()
    print(f"{'n':>2}  {'family':<12} {'dim':>4}  {'sound':<5}  noether verdicts")
    for n in range(1, args.max_n + 1):
        for name, f in families(n):
            t0 = time.perf_counter()
            eq = EquationSpec(n, f)
            res = classify(eq)
            gens = catalog(eq)
            sound = all(invariance_check(vf, eq) for vf in gens)
            try:
                verdicts = " ".join(f"{vf.label}:{noether_check(vf, eq).kind[0]}" for vf in gens if vf.label != "Vbeta")
            except Exception as exc:  # e.g. no antiderivative for f
                verdicts = f"({type(exc).__name__})"
            dt = time.perf_counter() - t0
            print(f"{n:>2}  {name:<12} {res.dimension:>4}  {str(sound):<5}  {verdicts}  [{dt:.2f}s]")


if __name__ == "__main__":
    main()
