"""Closed-form estimator variances and the Monte Carlo harness that checks them.

Every formula is evaluated from a single joint moment table (orders up to
2p-2); the basic/alternative/gap identities then double as transcription
checks. The Monte Carlo side re-runs the full sketch + estimate cycle many
times with seeds derived from the configured master seed, so validation runs
are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .errors import ParameterError
from .estimators import solve_margin_cubics_vec, RESIDUAL_TOL
from .model import (
    decomposition_coefficients,
    exact_lp_distance,
    joint_moments,
    vector_powers,
)
from .projections import (
    NORMAL,
    moment_s,
    uniforms_from_raw,
    variates_from_uniforms,
)
from .sketcher import ALTERNATIVE, BASIC, SketchConfig

_MC_STREAM_SALT = 0x4C50534B  # "LPSK"


# --- p = 4 formulas ---------------------------------------------------------


def variance_subgaussian_p4(x, y, k: int, s: float) -> float:
    """Variance of the basic-strategy estimator under SubG(s) projections.

    s = 3 is the normal case; every (s-3) correction then vanishes.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if s < 1.0:
        raise ParameterError(f"fourth moment s must be >= 1, got {s}")
    M = joint_moments(x, y, 6).M
    e = s - 3.0
    return (
        36.0 * (M[4, 0] * M[0, 4] + M[2, 2] ** 2 + e * M[4, 4])
        + 16.0 * (M[6, 0] * M[0, 2] + M[3, 1] ** 2 + e * M[6, 2])
        + 16.0 * (M[2, 0] * M[0, 6] + M[1, 3] ** 2 + e * M[2, 6])
        - 48.0 * (M[5, 0] * M[0, 3] + M[2, 1] * M[3, 2] + e * M[5, 3])
        - 48.0 * (M[3, 0] * M[0, 5] + M[1, 2] * M[2, 3] + e * M[3, 5])
        + 32.0 * (M[4, 0] * M[0, 4] + M[1, 1] * M[3, 3] + e * M[4, 4])
    ) / k


def variance_basic_p4(x, y, k: int) -> float:
    """Variance of the basic-strategy estimator with normal projections."""
    return variance_subgaussian_p4(x, y, k, 3.0)


def variance_alternative_p4(x, y, k: int) -> float:
    """Variance under the alternative strategy (independent matrices)."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    M = joint_moments(x, y, 6).M
    return (
        36.0 * (M[4, 0] * M[0, 4] + M[2, 2] ** 2)
        + 16.0 * (M[6, 0] * M[0, 2] + M[3, 1] ** 2)
        + 16.0 * (M[2, 0] * M[0, 6] + M[1, 3] ** 2)
    ) / k


def delta4(x, y, k: int) -> float:
    """Variance gap basic minus alternative at p = 4.

    Non-positive whenever both vectors are non-negative.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    M = joint_moments(x, y, 6).M
    return (
        -48.0 * (M[5, 0] * M[0, 3] + M[2, 1] * M[3, 2])
        - 48.0 * (M[3, 0] * M[0, 5] + M[1, 2] * M[2, 3])
        + 32.0 * (M[4, 0] * M[0, 4] + M[1, 1] * M[3, 3])
    ) / k


def variance_mle_p4(x, y, k: int) -> float:
    """Asymptotic (large-k) variance of the margin-refined estimator."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    M = joint_moments(x, y, 6).M
    total = 0.0
    for w, (s, t) in ((36.0, (2, 2)), (16.0, (3, 1)), (16.0, (1, 3))):
        prod = M[2 * s, 0] * M[0, 2 * t]
        sq = M[s, t] ** 2
        denom = prod + sq
        if denom > 0.0:
            total += w * (prod - sq) ** 2 / denom
    return total / k


# --- p = 6 formulas ---------------------------------------------------------


def variance_alternative_p6(x, y, k: int) -> float:
    """The five independent-matrix terms of the p = 6 variance."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    M = joint_moments(x, y, 10).M
    return (
        400.0 * (M[6, 0] * M[0, 6] + M[3, 3] ** 2)
        + 225.0 * (M[4, 0] * M[0, 8] + M[2, 4] ** 2)
        + 225.0 * (M[8, 0] * M[0, 4] + M[4, 2] ** 2)
        + 36.0 * (M[2, 0] * M[0, 10] + M[1, 5] ** 2)
        + 36.0 * (M[10, 0] * M[0, 2] + M[5, 1] ** 2)
    ) / k


def delta6(x, y, k: int) -> float:
    """Shared-matrix correction to the p = 6 variance (sign unproven)."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    M = joint_moments(x, y, 10).M
    return (
        -600.0 * (M[5, 0] * M[0, 7] + M[3, 4] * M[2, 3])
        - 600.0 * (M[7, 0] * M[0, 5] + M[3, 2] * M[4, 3])
        + 240.0 * (M[4, 0] * M[0, 8] + M[3, 5] * M[1, 3])
        + 240.0 * (M[8, 0] * M[0, 4] + M[3, 1] * M[5, 3])
        + 450.0 * (M[6, 0] * M[0, 6] + M[2, 2] * M[4, 4])
        - 180.0 * (M[3, 0] * M[0, 9] + M[2, 5] * M[1, 4])
        - 180.0 * (M[7, 0] * M[0, 5] + M[2, 1] * M[5, 4])
        - 180.0 * (M[5, 0] * M[0, 7] + M[4, 5] * M[1, 2])
        - 180.0 * (M[9, 0] * M[0, 3] + M[4, 1] * M[5, 2])
        + 72.0 * (M[6, 0] * M[0, 6] + M[1, 1] * M[5, 5])
    ) / k


def variance_basic_p6(x, y, k: int) -> float:
    """Variance of the basic-strategy p = 6 estimator with normal projections."""
    return variance_alternative_p6(x, y, k) + delta6(x, y, k)


# --- Monte Carlo ------------------------------------------------------------


def simulate_estimates(
    x,
    y,
    config: SketchConfig,
    trials: int,
    estimator: str | None = None,
    batch: int = 4096,
) -> np.ndarray:
    """Distance estimates from `trials` independent sketch+estimate cycles.

    Trial t always consumes the t-th fixed-size block of the Philox stream
    keyed by (master_seed, salt), so results do not depend on the batch size.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p, k, D = config.p, config.k, x.shape[0]
    if estimator is None:
        estimator = config.strategy
    if estimator == "mle":
        if p != 4 or config.strategy != ALTERNATIVE:
            raise ParameterError("mle simulation requires a p=4 alternative-strategy config")
    elif estimator != config.strategy:
        raise ParameterError(
            f"estimator {estimator!r} does not match sketch strategy {config.strategy!r}"
        )
    n_mat = 1 if config.strategy == BASIC else p - 1

    xp = vector_powers(x, p - 1)[1:]  # (p-1, D), row t-1 = power t
    yp = vector_powers(y, p - 1)[1:]
    c = decomposition_coefficients(p)
    margin_sum = float(np.sum(x**p) + np.sum(y**p))

    bitgen = Philox(key=[config.master_seed, _MC_STREAM_SALT])
    gen = Generator(bitgen)

    out = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        raw = gen.integers(0, 1 << 64, size=(b, n_mat, D, k), dtype=np.uint64)
        R = variates_from_uniforms(uniforms_from_raw(raw), config.family)

        if config.strategy == BASIC:
            U = np.einsum("td,bodk->btk", xp, R)  # o is the single-matrix axis
            V = np.einsum("td,bodk->btk", yp, R)
            inner = np.zeros(b)
            for t in range(1, p):
                inner += c[t] * np.einsum("bk,bk->b", U[:, p - t - 1], V[:, t - 1])
            out[done : done + b] = margin_sum + inner / k
        elif estimator == "mle":
            out[done : done + b] = _mle_batch(x, y, xp, yp, R, k)
        else:
            inner = np.zeros(b)
            for t in range(1, p):
                u = np.einsum("d,bdk->bk", xp[p - t - 1], R[:, t - 1])
                v = np.einsum("d,bdk->bk", yp[t - 1], R[:, t - 1])
                inner += c[t] * np.einsum("bk,bk->b", u, v)
            out[done : done + b] = margin_sum + inner / k
        done += b
    return out


def _mle_batch(x, y, xp, yp, R, k):
    m = {t: float(np.sum(x**t)) for t in (2, 4, 6)}
    my = {t: float(np.sum(y**t)) for t in (2, 4, 6)}
    value = m[4] + my[4]
    for s, t, w in ((2, 2, 6.0), (3, 1, -4.0), (1, 3, -4.0)):
        u = np.einsum("d,bdk->bk", xp[s - 1], R[:, t - 1])
        v = np.einsum("d,bdk->bk", yp[t - 1], R[:, t - 1])
        ip = np.einsum("bk,bk->b", u, v)
        nu = np.einsum("bk,bk->b", u, u)
        nv = np.einsum("bk,bk->b", v, v)
        a_hat, res, _, inside = solve_margin_cubics_vec(ip, nu, nv, m[2 * s], my[2 * t], k)
        ok = inside & (res <= RESIDUAL_TOL)
        value = value + w * np.where(ok, a_hat, ip / k)
    return value


@dataclass(frozen=True)
class VarianceReport:
    """Analytic variance terms for a pair, with Monte Carlo counterparts."""

    p: int
    k: int
    exact_distance: float
    basic: float
    alternative: float
    delta: float
    mle_asymptotic: float | None
    sub_gaussian_s: float
    estimator: str
    trials: int | None = None
    empirical_mean: float | None = None
    empirical_variance: float | None = None
    analytic_variance: float | None = None  # formula matching the estimator run
    mean_z_score: float | None = None
    variance_ratio: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def analytic_report(x, y, config: SketchConfig) -> VarianceReport:
    """Closed-form fields only (no simulation)."""
    p, k = config.p, config.k
    s = moment_s(config.family)
    if p == 4:
        basic = variance_subgaussian_p4(x, y, k, s)
        alt = variance_alternative_p4(x, y, k)
        gap = delta4(x, y, k)
        mle = variance_mle_p4(x, y, k)
    elif p == 6:
        if config.family.kind != NORMAL:
            raise ParameterError("p=6 variance formulas are implemented for the normal family")
        basic = variance_basic_p6(x, y, k)
        alt = variance_alternative_p6(x, y, k)
        gap = delta6(x, y, k)
        mle = None
    else:
        raise ParameterError(f"variance formulas are implemented for p in {{4, 6}}, got {p}")
    return VarianceReport(
        p=p,
        k=k,
        exact_distance=exact_lp_distance(x, y, p),
        basic=basic,
        alternative=alt,
        delta=gap,
        mle_asymptotic=mle,
        sub_gaussian_s=s,
        estimator=config.strategy,
    )


def _analytic_for(x, y, config: SketchConfig, estimator: str) -> float | None:
    p, k = config.p, config.k
    s = moment_s(config.family)
    if estimator == "basic":
        if p == 4:
            return variance_subgaussian_p4(x, y, k, s)
        if p == 6 and config.family.kind == NORMAL:
            return variance_basic_p6(x, y, k)
        return None
    if config.family.kind != NORMAL:
        return None
    if estimator == "alternative":
        return variance_alternative_p4(x, y, k) if p == 4 else variance_alternative_p6(x, y, k)
    if estimator == "mle":
        return variance_mle_p4(x, y, k) if p == 4 else None
    return None


def monte_carlo_validate(
    x,
    y,
    config: SketchConfig,
    trials: int,
    estimator: str | None = None,
) -> VarianceReport:
    """Run repeated sketch+estimate cycles and compare against the formulas."""
    if trials < 100:
        raise ParameterError(f"need at least 100 trials to estimate a variance, got {trials}")
    if estimator is None:
        estimator = config.strategy

    base = analytic_report(x, y, config)
    est = simulate_estimates(x, y, config, trials, estimator=estimator)
    # Fixed-order pairwise reduction (numpy's summation) keeps this reproducible.
    emp_mean = float(np.mean(est))
    emp_var = float(np.var(est, ddof=1))
    analytic = _analytic_for(x, y, config, estimator)

    d = base.exact_distance
    se = np.sqrt(emp_var / trials) if emp_var > 0 else 0.0
    z = (emp_mean - d) / se if se > 0 else 0.0
    ratio = emp_var / analytic if analytic else None

    return VarianceReport(
        p=base.p,
        k=base.k,
        exact_distance=d,
        basic=base.basic,
        alternative=base.alternative,
        delta=base.delta,
        mle_asymptotic=base.mle_asymptotic,
        sub_gaussian_s=base.sub_gaussian_s,
        estimator=estimator,
        trials=trials,
        empirical_mean=emp_mean,
        empirical_variance=emp_var,
        analytic_variance=analytic,
        mean_z_score=float(z),
        variance_ratio=None if ratio is None else float(ratio),
    )
