"""Theorem-1 and Butler bounds across dimensions, as a plain-text table."""

import argparse
import math
import warnings

from chromatic_tiler.bounds import butler_bound, theorem1_bound


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--c", type=float, default=3.0, help="Butler's absolute constant")
    ap.add_argument("--kexp", type=float, default=0.0, help="k = n^(kexp*n), capped to a float")
    args = ap.parse_args()
    print(f"{'n':>8} {'ln bound':>14} {'bound^(1/n)':>12} {'butler':>10}")
    for n in (3, 10, 30, 100, 300, 10**3, 10**4, 10**5, 10**6):
        k = max(1, int(min(math.exp(args.kexp * n * math.log(n)), 1e300)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lb = theorem1_bound(n, k, args.gamma)
            bu = butler_bound(n, 2**n, args.c)
        print(f"{n:>8} {lb:>14.4f} {math.exp(lb / n):>12.6f} {bu:>10.6f}")


if __name__ == "__main__":
    main()
