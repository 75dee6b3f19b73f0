"""Evaluation counts of the fast orbit sum on q = 6^j, M the divisor nearest q^{1/6}.

    python scripts/run_scaling.py --jmax 6 --csv scaling.csv
"""
import argparse

from twistl.forms import delta_form
from twistl.oracle import BenchConfig, nearest_divisor_split, scaling_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=int, default=6)
    ap.add_argument("--jmin", type=int, default=2)
    ap.add_argument("--jmax", type=int, default=5)
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--naive-limit", type=int, default=20_000)
    ap.add_argument("--csv", help="write the report here as CSV")
    args = ap.parse_args()

    cases = [(args.base**j,) + nearest_divisor_split(args.base**j) for j in range(args.jmin, args.jmax + 1)]
    rep = scaling_report(cases, delta_form(), BenchConfig(t=args.t, naive_limit=args.naive_limit, threads=1))
    C = None
    print(f"{'q':>8} {'M':>4} {'N':>7} {'lift_evals':>10} {'evals/q':>9} {'bound ratio':>11} {'rel_dev':>9}")
    for r in rep.rows:
        E = (r.M**5 + r.N) * r.q**0.15
        C = C or r.lift_evals / E
        dev = "-" if r.rel_dev is None else f"{r.rel_dev:.1e}"
        print(f"{r.q:>8} {r.M:>4} {r.N:>7} {r.lift_evals:>10} {r.evals_per_q:>9.4f} {r.lift_evals / (C * E):>11.2f} {dev:>9}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(rep.to_csv())


if __name__ == "__main__":
    main()
