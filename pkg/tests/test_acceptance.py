"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -s` to see the
summary lines as they complete.
"""

import json

import numpy as np
import pytest

from lpsketch import (
    ProjectionFamily,
    SketchConfig,
    decomposed_lp_distance,
    delta4,
    exact_lp_distance,
    simulate_estimates,
    solve_margin_cubic,
    sketch_row,
    variance_alternative_p4,
    variance_basic_p4,
    variance_basic_p6,
    variance_mle_p4,
    variance_subgaussian_p4,
)
from lpsketch.cli import main

D, K, TRIALS = 16, 8, 100_000


def report(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    assert ok, line


def nonneg_pairs(n, seed, D=D):
    rng = np.random.default_rng(seed)
    return [(np.abs(rng.normal(size=D)), np.abs(rng.normal(size=D))) for _ in range(n)]


@pytest.fixture(scope="module")
def mc_runs():
    """1e5-trial Monte Carlo estimates per pair, shared by criteria 1 and 2."""
    pairs = nonneg_pairs(20, seed=2024)
    runs = []
    for i, (x, y) in enumerate(pairs):
        basic = simulate_estimates(x, y, SketchConfig(p=4, k=K, master_seed=100 + i), TRIALS)
        alt = simulate_estimates(
            x, y, SketchConfig(p=4, k=K, strategy="alternative", master_seed=200 + i), TRIALS
        )
        p6 = simulate_estimates(x, y, SketchConfig(p=6, k=K, master_seed=300 + i), TRIALS)
        runs.append((x, y, basic, alt, p6))
    return runs


def test_criterion_1_unbiasedness(mc_runs):
    worst = 0.0
    for x, y, basic, _, _ in mc_runs:
        d = exact_lp_distance(x, y, 4)
        se = basic.std(ddof=1) / np.sqrt(TRIALS)
        worst = max(worst, abs(basic.mean() - d) / se)
    report(1, worst <= 4.0, f"basic p=4 mean within 4 SE on 20 pairs (worst z={worst:.2f})")


def test_criterion_2_variance_agreement(mc_runs):
    worst = 0.0
    for x, y, basic, alt, p6 in mc_runs:
        for sample, formula in (
            (basic, variance_basic_p4(x, y, K)),
            (alt, variance_alternative_p4(x, y, K)),
            (p6, variance_basic_p6(x, y, K)),
        ):
            worst = max(worst, abs(sample.var(ddof=1) / formula - 1.0))
    report(2, worst <= 0.05, f"empirical variances within 5% of formulas (worst dev={worst:.3f})")


def test_criterion_3_delta4_signs():
    rng = np.random.default_rng(77)
    ok = True
    for _ in range(10_000):
        x = np.abs(rng.normal(size=D))
        y = np.abs(rng.normal(size=D))
        x[rng.random(D) < rng.uniform(0, 0.8)] = 0.0
        y[rng.random(D) < rng.uniform(0, 0.8)] = 0.0
        ok &= delta4(x, y, K) <= 1e-12
    for _ in range(1000):
        x = -np.abs(rng.normal(size=D))
        y = np.abs(rng.normal(size=D))
        ok &= delta4(x, y, K) >= -1e-12
    report(3, ok, "delta4 <= 0 on 1e4 non-negative pairs, >= 0 on 1e3 sign-split pairs")


def test_criterion_4_identity():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(10_000):
        x, y = rng.normal(size=D), rng.normal(size=D)
        basic = variance_basic_p4(x, y, K)
        resid = abs(basic - variance_alternative_p4(x, y, K) - delta4(x, y, K))
        worst = max(worst, resid / max(1.0, abs(basic)))
    report(4, worst <= 1e-9, f"basic = alternative + delta4 on 1e4 signed pairs (worst rel={worst:.1e})")


def test_criterion_5_subgaussian():
    rng = np.random.default_rng(99)
    worst_eq = 0.0
    for _ in range(1000):
        x, y = rng.normal(size=D), rng.normal(size=D)
        b = variance_basic_p4(x, y, K)
        worst_eq = max(worst_eq, abs(variance_subgaussian_p4(x, y, K, 3.0) - b) / max(1.0, abs(b)))

    worst_mc = 0.0
    for i, (x, y) in enumerate(nonneg_pairs(3, seed=505)):
        for fam, s in ((ProjectionFamily("threepoint", 1.0), 1.0), (ProjectionFamily("uniform"), 9 / 5)):
            cfg = SketchConfig(p=4, k=K, family=fam, master_seed=400 + i)
            est = simulate_estimates(x, y, cfg, TRIALS)
            worst_mc = max(worst_mc, abs(est.var(ddof=1) / variance_subgaussian_p4(x, y, K, s) - 1.0))
    ok = worst_eq <= 1e-12 and worst_mc <= 0.05
    report(5, ok, f"s=3 degeneration rel={worst_eq:.1e}; s=1, s=9/5 MC dev={worst_mc:.3f}")


def test_criterion_6_margin_mle():
    k, trials = 64, 10_000
    pairs = nonneg_pairs(10, seed=606)

    worst_var, mse_ok = 0.0, True
    for i, (x, y) in enumerate(pairs):
        cfg = SketchConfig(p=4, k=k, strategy="alternative", master_seed=700 + i)
        mle = simulate_estimates(x, y, cfg, trials, estimator="mle")
        alt = simulate_estimates(x, y, cfg, trials, estimator="alternative")
        d = exact_lp_distance(x, y, 4)
        worst_var = max(worst_var, abs(mle.var(ddof=1) / variance_mle_p4(x, y, k) - 1.0))
        mse_ok &= np.mean((mle - d) ** 2) <= np.mean((alt - d) ** 2)

    # Residuals on every solved (in-interval) cubic across sketch-level runs.
    worst_res, solved = 0.0, 0
    for i, (x, y) in enumerate(pairs):
        for seed in range(20):
            cfg = SketchConfig(p=4, k=k, strategy="alternative", master_seed=1000 * i + seed)
            sa = sketch_row(x, cfg, row_id=0)
            sb = sketch_row(y, cfg, row_id=1)
            for s, t in ((2, 2), (3, 1), (1, 3)):
                u, v = sa.vector(s, t), sb.vector(t, t)
                sol = solve_margin_cubic(
                    float(u @ v), float(u @ u), float(v @ v),
                    sa.marginal(2 * s), sb.marginal(2 * t), k,
                )
                if sol.in_interval:
                    solved += 1
                    worst_res = max(worst_res, sol.residual)
    ok = worst_var <= 0.10 and mse_ok and worst_res <= 1e-9 and solved > 0
    report(
        6,
        ok,
        f"MLE var dev={worst_var:.3f} (<=10%), MSE<=alt on all pairs: {mse_ok}, "
        f"max residual {worst_res:.1e} over {solved} solved cubics",
    )


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(707)
    worst = 0.0
    for p in (4, 6, 8):
        for _ in range(1000):
            n = int(rng.integers(1, 32))
            x, y = rng.normal(size=n), rng.normal(size=n)
            exact = exact_lp_distance(x, y, p)
            worst = max(worst, abs(decomposed_lp_distance(x, y, p) - exact) / (1.0 + exact))
    report(7, worst <= 1e-10, f"decomposed vs direct distance on 3x1e3 pairs (worst rel={worst:.1e})")


def test_criterion_8_deterministic_cli(tmp_path):
    rng = np.random.default_rng(808)
    csv = tmp_path / "data.csv"
    np.savetxt(csv, np.abs(rng.normal(size=(5, 32))), delimiter=",")

    outputs = []
    for run in ("a", "b"):
        sk = str(tmp_path / f"sk_{run}.lpsk")
        js = str(tmp_path / f"est_{run}.json")
        assert main(["sketch", "--input", str(csv), "--output", sk,
                     "--p", "4", "--k", "16", "--seed", "31337"]) == 0
        assert main(["estimate", "--sketches", sk, "--estimator", "basic",
                     "--pairs", "all", "--output", js]) == 0
        outputs.append((open(sk, "rb").read(), open(js, "rb").read()))
    ok = outputs[0] == outputs[1]
    # Sanity: the JSON is non-trivial.
    ok &= len(json.loads(outputs[0][1].decode())) == 10
    report(8, ok, "two full sketch+estimate CLI runs are byte-identical")
