"""Distortion exponent against the rescaled word exponent on a twisted Koch arc."""

import argparse

from quasilab.repellers import twisted_koch
from quasilab.verify import relation_check


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--twist", type=float, default=0.15)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--walks", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=5)
    p.add_argument("--gen", type=int, default=7)
    p.add_argument("--point", nargs=2, type=float, action="append", metavar=("A", "B"),
                   help="(a, b) pair, repeatable; default (-0.2, 0) and (0.25, 0)")
    args = p.parse_args()

    points = [tuple(x) for x in args.point] if args.point else [(-0.2, 0.0), (0.25, 0.0)]
    rep = relation_check(twisted_koch(args.twist), points, m=args.m, eta=args.eta, walks=args.walks,
                         seed=args.seed, generation=args.gen)
    print("a,b,one_minus_r,arc_count,d_exponent,word_count,scaled_f,difference")
    for r in rep.rows:
        print(f"{r['a']},{r['b']},{r['one_minus_r']:.6g},{r['arc_count']},{r['d_exponent']:.4f},"
              f"{r['word_count']},{r['scaled_f']:.4f},{r['difference']:.4f}")
    print(f"# {'PASS' if rep.passed else 'FAIL'} at tolerance {rep.tolerances['difference']}")


if __name__ == "__main__":
    main()
