"""L(1/2, Delta x chi) for every primitive chi mod q, from both engines and,
for small q, the direct quadrature.

    python scripts/central_values.py 5 16 36 --oracle
"""
import argparse
import time

from twistl.assembly import PrecisionConfig, assemble_L, suggest_split
from twistl.dirichlet import char_from_label, primitive_labels
from twistl.forms import delta_form
from twistl.oracle import direct_integral_L


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("moduli", type=int, nargs="+")
    ap.add_argument("--gamma", type=float, default=4.0)
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--oracle", action="store_true", help="also run the O(q) direct integral")
    args = ap.parse_args()

    form = delta_form()
    cfg = PrecisionConfig(gamma_prec=args.gamma, eps=args.eps)
    for q in args.moduli:
        split = suggest_split(q)
        for lab in primitive_labels(q):
            chi = char_from_label(q, lab)
            t0 = time.perf_counter()
            fast = assemble_L(form, chi, cfg, engine="fast", split=split)
            t1 = time.perf_counter()
            naive = assemble_L(form, chi, cfg, engine="naive")
            line = (
                f"q={q:<5} label={lab:<5} split={split[0]}x{split[1]:<6} L={fast.value:.10f} "
                f"|fast-naive|/|L|={abs(fast.value - naive.value) / abs(naive.value):.1e} "
                f"err~{fast.err_estimate:.1e} fast {t1 - t0:.2f}s evals={fast.counts['lift_evals']}"
            )
            if args.oracle:
                ref = direct_integral_L(form, chi, 0.5, args.gamma)
                line += f" |fast-direct|/|L|={abs(fast.value - ref) / abs(ref):.1e}"
            print(line)


if __name__ == "__main__":
    main()
