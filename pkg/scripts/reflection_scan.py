"""Word counts on a twisted Koch arc and on its mirror image, surrogate and Monte Carlo."""

import argparse

from quasilab.repellers import twisted_koch
from quasilab.verify import reflection_check


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--twist", type=float, default=0.15)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--alpha", type=float, default=1.4)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.3)
    p.add_argument("--walks", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=2)
    p.add_argument("--gen", type=int, default=6)
    args = p.parse_args()

    spec = twisted_koch(args.twist)
    d = 3.0**-args.m
    print("signs,weights,count,mirrored_count,bar,passed,antisymmetry_residual")
    for signs in ("bb", "b+", "b-"):
        for weights in ("surrogate", "mc"):
            rep = reflection_check(spec, d, args.alpha, args.gamma, args.eta, signs, weights, args.walks,
                                   args.seed, args.gen)
            s = rep.summary
            print(f"{signs},{weights},{s['count']},{s['mirrored_count']},{rep.rows[0]['bar']:.2f},"
                  f"{rep.passed},{s['max_antisymmetry_residual']:.3f}")


if __name__ == "__main__":
    main()
