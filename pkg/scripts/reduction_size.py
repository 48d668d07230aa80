"""Reduced dataset size against epsilon for both rounding schemes.

    python3 scripts/reduction_size.py --n 1000000 --d 5 > sizes.csv
"""

import argparse
import csv
import sys
import time

from rmsets.datagen import GenSpec, generate
from rmsets.reduction import reduce, size_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--kind", default="independent")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    args = ap.parse_args()
    data = generate(GenSpec(args.kind, args.n, args.d, args.seed))
    out = csv.writer(sys.stdout)
    out.writerow(["mode", "epsilon", "n", "reduced_size", "fraction", "bound", "ms"])
    for mode in ("additive", "multiplicative"):
        for eps in args.eps:
            t = time.perf_counter()
            rd = reduce(data, mode, eps)
            ms = 1000 * (time.perf_counter() - t)
            out.writerow([mode, eps, data.n, rd.reduced.n, f"{rd.reduced.n / data.n:.4f}",
                          f"{size_bound(mode, args.d, eps):.4g}", f"{ms:.1f}"])


if __name__ == "__main__":
    main()
