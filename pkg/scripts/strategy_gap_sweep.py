#!/usr/bin/env python3
"""Explore the sign of the basic-vs-alternative variance gap.

For p = 4 the gap is provably <= 0 on non-negative data; for p = 6 the
analogous statement is unproven, so this sweep reports how often it holds.

Example:
    python3 scripts/strategy_gap_sweep.py --samples 20000
"""

import argparse

import numpy as np

from lpsketch import delta4, delta6


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--D", type=int, default=16)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sparsity", type=float, default=0.3, help="fraction of zeroed coordinates")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    viol4 = viol6 = 0
    worst6 = -np.inf
    for _ in range(args.samples):
        x = np.abs(rng.normal(size=args.D))
        y = np.abs(rng.normal(size=args.D))
        x[rng.random(args.D) < args.sparsity] = 0.0
        y[rng.random(args.D) < args.sparsity] = 0.0
        if delta4(x, y, args.k) > 1e-12:
            viol4 += 1
        d6 = delta6(x, y, args.k)
        worst6 = max(worst6, d6)
        if d6 > 1e-12:
            viol6 += 1

    n = args.samples
    print(f"non-negative pairs sampled: {n} (D={args.D}, k={args.k}, sparsity={args.sparsity})")
    print(f"delta4 > 0 violations: {viol4}/{n} (proven impossible; expect 0)")
    print(f"delta6 > 0 violations: {viol6}/{n} (conjectured 0; observed max delta6 = {worst6:.3e})")


if __name__ == "__main__":
    main()
