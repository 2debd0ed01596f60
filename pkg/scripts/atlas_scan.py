"""Derivative and rotation proxies at the tip of wedge and spiral-wedge domains."""

import argparse

from quasilab.atlas import AtlasDomain, probe_scan


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kmin", type=int, default=4)
    p.add_argument("--kmax", type=int, default=12)
    args = p.parse_args()

    doms = [AtlasDomain("wedge", 0.7), AtlasDomain("spiral_wedge", 1.0, 0.2), AtlasDomain("spiral_wedge", 1.0, -0.2)]
    print("kind,alpha,beta,k,log_exact_abs,log_proxy_abs,derivative_ratio,exact_arg,log_rot,rotation_ratio")
    for dom in doms:
        scan = probe_scan(dom, range(args.kmin, args.kmax + 1))
        for k, rec, dr, rr in zip(scan.ks, scan.records, scan.derivative_ratios, scan.rotation_ratios):
            print(f"{dom.kind},{dom.alpha},{dom.beta},{k},{rec.log_exact_abs:.5f},"
                  f"{rec.log_exact_abs * dr:.5f},{dr:.4f},{rec.exact_arg:.5f},{rec.log_rot:.5f},{rr:.4f}")
        print(f"# {dom.kind}({dom.alpha},{dom.beta}) derivative trend {scan.derivative_trend:.4f}")


if __name__ == "__main__":
    main()
