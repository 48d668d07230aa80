"""Exact versus approximate 2D average happiness on unit-circle data.

Every circle point is on the hull, so n controls the hull size directly.
The exact solver is skipped above --exact-max.

    python3 scripts/arms2d_circle.py --ns 1000 10000 1000000 --eps 0.01 0.1 0.3
"""

import argparse
import time

from rmsets import approx_2d_arms, exact_2d_arms
from rmsets.datagen import GenSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.1, 0.3])
    ap.add_argument("--r", type=int, default=5)
    ap.add_argument("--exact-max", type=int, default=20000)
    args = ap.parse_args()
    print("n,solver,epsilon,ahr,candidates,seconds")
    for n in args.ns:
        data = generate(GenSpec("circle2d", n, 2, 1))
        if n <= args.exact_max:
            t = time.perf_counter()
            ex = exact_2d_arms(data, args.r)
            print(f"{n},exact,,{ex.metrics['ahr']:.9f},{ex.metrics['candidates']},{time.perf_counter() - t:.3f}")
        for eps in args.eps:
            t = time.perf_counter()
            ap_ = approx_2d_arms(data, args.r, eps)
            print(f"{n},approx,{eps},{ap_.metrics['ahr']:.9f},{ap_.metrics['candidates']},{time.perf_counter() - t:.3f}")


if __name__ == "__main__":
    main()
