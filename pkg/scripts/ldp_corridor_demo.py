#!/usr/bin/env python3
"""Finite-n sanity check of the guesswork rate curve.

For the ternary source, compares the exact decay -(1/n) log P{|g/n - t| < eps}
computed by full enumeration against the rate curve J(t), over a grid of t.
"""
import argparse
import math

import numpy as np

import tiltlab as tl


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--epsilon", type=float, default=0.1)
    args = parser.parse_args()

    source = tl.load_source(tl.builtin_spec_path("s3"))
    table = tl.build_rank_table(source, args.n)
    probs = np.exp(table.log_probs)
    norm_log_rank = np.log(table.rank_of.astype(float)) / args.n

    print(f"n={args.n} eps={args.epsilon}")
    print(f"{'t':>6} {'empirical':>12} {'J(t)':>12} {'diff':>9}")
    for t in np.arange(0.1, math.log(3), 0.1):
        p = float(probs[np.abs(norm_log_rank - t) < args.epsilon].sum())
        empirical = -math.log(p) / args.n if p > 0 else math.inf
        rate = tl.rate_g(source, float(t))
        print(f"{t:6.2f} {empirical:12.4f} {rate:12.4f} {empirical - rate:9.4f}")


if __name__ == "__main__":
    main()
