"""Empirical growth constants of the integral kernels.

Scans random pairs at log-uniform separations and records the empirical
constants in |N| <= C/|x-y|^2 and |gradN| <= M/|x-y|^3, at a ladder of
sample sizes so their stabilization is visible.

    python3 scripts/kernel_growth.py --pairs 25000,50000,100000,200000
"""

import argparse

from starcurl.geometry import parse_domain
from starcurl.kernels import kernel_bound_check
from starcurl.smoothing import Mollifier


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", default="ball:r0=2")
    ap.add_argument("--pairs", default="25000,50000,100000,200000")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    dom = parse_domain(args.domain)
    mol = Mollifier()
    ladder = [int(n) for n in args.pairs.split(",")]

    print(f"domain={args.domain}")
    print(f"{'n_pairs':>10} {'C_emp (N)':>14} {'M_emp (gradN)':>14}")
    for n in ladder:
        c = kernel_bound_check(dom, mol, n_pairs=n, seed=args.seed,
                               kernel="N")
        m = kernel_bound_check(dom, mol, n_pairs=n, seed=args.seed,
                               kernel="grad")
        print(f"{n:>10} {c['C_emp']:>14.4f} {m['C_emp']:>14.4f}")
    x, y, s = c["worst_pair"]
    print(f"worst N pair at separation {s:.3e}: x={x}, y={y}")


if __name__ == "__main__":
    main()
