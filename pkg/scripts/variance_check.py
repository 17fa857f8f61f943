#!/usr/bin/env python3
"""Compare closed-form estimator variances against Monte Carlo on random pairs.

Example:
    python3 scripts/variance_check.py --pairs 5 --trials 50000 --k 8 --p 4
"""

import argparse

import numpy as np

from lpsketch import ProjectionFamily, SketchConfig, monte_carlo_validate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=5)
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--D", type=int, default=16)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--p", type=int, default=4, choices=[4, 6])
    ap.add_argument("--strategy", default="basic", choices=["basic", "alternative"])
    ap.add_argument("--family", default="normal", choices=["normal", "uniform", "threepoint"])
    ap.add_argument("--s", type=float, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--signed", action="store_true", help="allow negative data entries")
    args = ap.parse_args()

    family = ProjectionFamily(args.family, args.s) if args.family == "threepoint" else ProjectionFamily(args.family)
    rng = np.random.default_rng(args.seed)

    print(f"{'pair':>4} {'d_(p)':>12} {'analytic var':>14} {'empirical var':>14} {'ratio':>7} {'mean z':>7}")
    for i in range(args.pairs):
        x, y = rng.normal(size=args.D), rng.normal(size=args.D)
        if not args.signed:
            x, y = np.abs(x), np.abs(y)
        cfg = SketchConfig(p=args.p, k=args.k, strategy=args.strategy, family=family, master_seed=args.seed + i)
        r = monte_carlo_validate(x, y, cfg, args.trials)
        print(
            f"{i:>4} {r.exact_distance:>12.4f} {r.analytic_variance:>14.4f} "
            f"{r.empirical_variance:>14.4f} {r.variance_ratio:>7.4f} {r.mean_z_score:>7.2f}"
        )


if __name__ == "__main__":
    main()
