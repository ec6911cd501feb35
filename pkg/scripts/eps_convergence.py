"""Truncation study: how fast the smoothly cut-off potential approaches the
full one as the cutoff radius shrinks.

    python3 scripts/eps_convergence.py --field rigid --point 0.3,0,0
"""

import argparse

import numpy as np

from starcurl.fields import parse_field
from starcurl.geometry import parse_domain
from starcurl.operators import CurlInverseOp
from starcurl.verify import eps_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", default="ball:r0=2")
    ap.add_argument("--field", default="rigid")
    ap.add_argument("--point", default="0.3,0,0")
    ap.add_argument("--eps", default="0.8,0.4,0.2,0.1,0.05,0.025")
    args = ap.parse_args()

    op = CurlInverseOp(parse_domain(args.domain))
    g = parse_field(args.field)
    x = [float(c) for c in args.point.split(",")]
    eps = [float(e) for e in args.eps.split(",")]

    tab = eps_study(op, g, x, eps)
    print(f"domain={args.domain} field={args.field} point={tab.point}")
    print(f"|Rg| at point: {tab.base_norm:.6e}")
    print(f"{'eps':>10} {'|R_eps g - Rg|':>16} {'ratio':>8}")
    prev = None
    for e, err in zip(tab.eps, tab.errors):
        ratio = "" if prev is None else f"{err / prev:8.3f}"
        print(f"{e:10.4f} {err:16.6e} {ratio:>8}")
        prev = err
    print(f"monotone: {tab.monotone}   final/first: {tab.final_over_first:.4f}")


if __name__ == "__main__":
    main()
