"""Accuracy of the fast orbit sum against box side and transfer degree.

Shows how the relative error against the naive sum falls with the Taylor
degree d for several box sides, which is what the default box cap and
degree rule are tuned on.

    python scripts/box_convergence.py --q 2520 --split 8x315 --t -2
"""
import argparse

import numpy as np

from twistl import counters
from twistl.dirichlet import split_character
from twistl.forms import delta_form
from twistl.oracle import first_primitive
from twistl.orbit_sum import SumRequest, fast_orbit_sums, naive_orbit_sums


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=2520)
    ap.add_argument("--split", default="8x315")
    ap.add_argument("--t", type=float, default=-2.0)
    ap.add_argument("--l", type=int, default=2)
    args = ap.parse_args()

    M, N = (int(x) for x in args.split.split("x"))
    form = delta_form()
    chi = first_primitive(args.q)
    split = split_character(chi, M, N)
    naive = naive_orbit_sums(form, chi, args.q, args.t, args.l)
    print(f"{'eta':>6} {'d':>3} {'boxes':>6} {'lift_evals':>10} {'rel err':>9} {'residual':>9}")
    for eta in (0.02, 0.05, 0.1, 0.2):
        for d in (2, 4, 6, 8, 10):
            with counters.counting() as c:
                res = fast_orbit_sums(SumRequest(form, split, args.t, args.l, d=d, eta=eta, threads=1))
            rel = float(np.max(np.abs(res.values - naive)) / np.max(np.abs(naive)))
            print(f"{eta:>6} {d:>3} {res.boxes:>6} {c.lift_evals:>10} {rel:>9.1e} {res.max_residual:>9.1e}")


if __name__ == "__main__":
    main()
