"""Drift of I1, I2, I3 and trajectory error against tolerance for the critical equation.

    python scripts/drift_sweep.py --n 2 --out drift.csv
"""

import argparse
import csv
import sys

from lieode import SolutionFamily, eval_family, first_integral_catalog, integrate
from lieode.numerics import drift

SIGN = {n: (-1) ** (n + 1) for n in range(1, 10)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--span", type=float, nargs=2, default=(-0.5, 0.5))
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    n = args.n
    lam = float(SIGN[n])
    fam = SolutionFamily(n, lam, 1.0, 0.0, -1.0)
    ints = first_integral_catalog(n, lam)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["tol", "steps", "max_error", "drift_I1", "drift_I2", "drift_I3"])
    for k in range(4, 13):
        tol = 10.0**-k
        traj = integrate(fam.equation(), eval_family(fam, args.span[0], 2 * n - 1), args.span, tol)
        err = max(abs(row[0] - eval_family(fam, x, 0)[0]) for x, row in zip(traj.xs, traj.states))
        w.writerow([tol, len(traj) - 1, err] + [drift(traj, ints[name]) for name in ("I1", "I2", "I3")])


if __name__ == "__main__":
    main()
