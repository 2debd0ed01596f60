"""Packing counts on the Koch arc over delta = 3**-m and the fitted slope."""

import argparse
import math

from quasilab.harmonic import sample_hits
from quasilab.repellers import generate_prefractal, koch
from quasilab.spectra import fit_exponent, packing_count


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gen", type=int, default=8)
    p.add_argument("--walks", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mmin", type=int, default=4)
    p.add_argument("--mmax", type=int, default=7)
    args = p.parse_args()

    dom = generate_prefractal(koch(), args.gen)
    hs = sample_hits(dom, args.walks, args.seed)
    rows = []
    print("m,delta,count")
    for m in range(args.mmin, args.mmax + 1):
        d = 3.0**-m
        # a very wide window keeps every disk: plain disjoint packing along the arc
        res = packing_count(dom, d, 1.26, 0.0, 50.0, "--", sample=hs, region="arc")
        rows.append((d, res.count))
        print(f"{m},{d!r},{res.count}")
    fit = fit_exponent(rows)
    print(f"# slope {fit.slope:.4f}  (log4/log3 = {math.log(4) / math.log(3):.4f})  residual {fit.residual:.3g}")


if __name__ == "__main__":
    main()
