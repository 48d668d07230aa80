"""Wall time of the sampled-AHR greedy as n grows, with the fitted log-log slope.

    python3 scripts/ahr_scaling.py --ns 10000 100000 1000000
"""

import argparse
import time

import numpy as np

from rmsets import greedy_ahr, sample_linear_utilities
from rmsets.datagen import GenSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[10**4, 10**5, 10**6])
    ap.add_argument("--d", type=int, default=7)
    ap.add_argument("--r", type=int, default=5)
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--kind", default="independent")
    args = ap.parse_args()
    sample = sample_linear_utilities(args.N, args.d, 0)
    times = []
    print("n,seconds,ahr")
    for n in args.ns:
        data = generate(GenSpec(args.kind, n, args.d, 1))
        t = time.perf_counter()
        sel = greedy_ahr(data, args.r, sample)
        times.append(time.perf_counter() - t)
        print(f"{n},{times[-1]:.4f},{sel.metrics['ahr']:.6f}")
    if len(times) > 1:
        print(f"# log-log slope {np.polyfit(np.log(args.ns), np.log(times), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
