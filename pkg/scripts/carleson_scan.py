"""Mean deviation of the Koch cylinder-measure ratio from 1 as |Y| grows."""

import argparse

from quasilab.repellers import koch
from quasilab.verify import carleson_ratio_scan


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--walks", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--gen", type=int, default=7)
    p.add_argument("--triples", type=int, default=200)
    p.add_argument("--max-rel-se", type=float, default=0.05)
    args = p.parse_args()

    letters = [(i,) for i in range(4)]
    rep = carleson_ratio_scan(koch(), letters, [1, 2, 3, 4], letters, args.walks, args.seed,
                              generation=args.gen, triples_per_length=args.triples, max_rel_se=args.max_rel_se)
    print("y_length,mean_deviation,error,triples")
    for m, v in sorted(rep.summary["per_length"].items()):
        print(f"{m},{v['mean']:.6g},{v['error']:.3g},{v['triples']}")
    print(f"# decay rate of log mean per letter: {rep.summary['log_decay_rate']:.3f}")
    print(f"# {'PASS' if rep.passed else 'FAIL'}: gap {rep.summary['gap']:.4g} vs two sigma {rep.summary['two_sigma']:.4g}")


if __name__ == "__main__":
    main()
