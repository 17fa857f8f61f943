"""Distance estimators operating on row sketches.

Three estimators of the even-order distance d_(p) = Sum |x_i - y_i|^p:

- basic: one shared projection matrix, inner products combined with the
  binomial weights; works for any supported even p;
- alternative: one independent matrix per inner-product term (p = 4 or 6);
- margin MLE (p = 4): each inner product is refined by solving a cubic in
  the exact marginal moments before combining.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cubic import cubic_scale, cubic_value, real_cubic_roots
from .errors import IncompatibleSketchError, ParameterError
from .model import decomposition_coefficients
from .sketcher import ALTERNATIVE, BASIC, RowSketch

BASIC_ESTIMATOR = "basic"
ALTERNATIVE_ESTIMATOR = "alternative"
MLE_ESTIMATOR = "mle"

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class DistanceEstimate:
    row_a: int
    row_b: int
    p: int
    value: float
    estimator: str
    clamped: bool = False
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class CubicSolution:
    a_hat: float
    residual: float  # |cubic(a_hat)| / term-magnitude scale
    root_count: int
    in_interval: bool  # root found inside the Cauchy-Schwarz interval


def _check_compatible(sa: RowSketch, sb: RowSketch, strategy: str | None = None):
    if sa.config != sb.config:
        raise IncompatibleSketchError(
            f"sketch configs differ between rows {sa.row_id} and {sb.row_id}"
        )
    if strategy is not None and sa.config.strategy != strategy:
        raise IncompatibleSketchError(
            f"estimator requires {strategy} sketches, got {sa.config.strategy}"
        )


def _finalize(value: float, clamp: bool) -> tuple[float, bool]:
    if clamp and value < 0.0:
        return 0.0, True
    return value, False


def estimate_basic(sa: RowSketch, sb: RowSketch, clamp: bool = False) -> DistanceEstimate:
    """Basic-strategy estimator; symmetric in its arguments bit-exactly."""
    _check_compatible(sa, sb, BASIC)
    cfg = sa.config
    p, k = cfg.p, cfg.k
    c = decomposition_coefficients(p)

    terms = {
        t: c[t] * float(np.dot(sa.vector(p - t, 0), sb.vector(t, 0)))
        for t in range(1, p)
    }
    # Sum mirror pairs first so swapping the arguments permutes nothing.
    inner = terms[p // 2]
    for t in range(1, p // 2):
        inner += terms[t] + terms[p - t]

    value = (sa.marginal(p) + sb.marginal(p)) + inner / k
    value, clamped = _finalize(value, clamp)
    return DistanceEstimate(sa.row_id, sb.row_id, p, value, BASIC_ESTIMATOR, clamped)


def estimate_alternative(sa: RowSketch, sb: RowSketch, clamp: bool = False) -> DistanceEstimate:
    """Alternative-strategy estimator: sa plays the x role, sb the y role."""
    _check_compatible(sa, sb, ALTERNATIVE)
    cfg = sa.config
    p, k = cfg.p, cfg.k
    c = decomposition_coefficients(p)

    inner = 0.0
    for t in range(1, p):
        inner += c[t] * float(np.dot(sa.vector(p - t, t), sb.vector(t, t)))

    value = sa.marginal(p) + sb.marginal(p) + inner / k
    value, clamped = _finalize(value, clamp)
    return DistanceEstimate(sa.row_id, sb.row_id, p, value, ALTERNATIVE_ESTIMATOR, clamped)


def solve_margin_cubics_vec(ip, nu, nv, mx, my, k):
    """Vectorized margin cubic solve.

    The unknown inner product a satisfies
    a^3 - (ip/k) a^2 + (-mx*my + (mx*nv + my*nu)/k) a - mx*my*ip/k = 0.
    Returns (a_hat, residual, root_count, in_interval) arrays.
    """
    ip, nu, nv, mx, my = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (ip, nu, nv, mx, my))
    )
    b = -ip / k
    c = -mx * my + (mx * nv + my * nu) / k
    d = -mx * my * ip / k

    roots, count = real_cubic_roots(b, c, d)
    bound = np.sqrt(mx * my)
    plain = ip / k

    dist = np.abs(roots - plain[..., None])
    dist = np.where(np.isnan(dist), np.inf, dist)
    inside = np.abs(roots) <= bound[..., None] * (1.0 + 1e-12)
    has_inside = np.any(inside, axis=-1)

    dist_in = np.where(inside, dist, np.inf)
    pick_in = np.argmin(dist_in, axis=-1)
    pick_any = np.argmin(dist, axis=-1)
    pick = np.where(has_inside, pick_in, pick_any)
    a_hat = np.take_along_axis(roots, pick[..., None], axis=-1)[..., 0]
    a_hat = np.where(has_inside, a_hat, np.clip(a_hat, -bound, bound))

    degenerate = mx * my == 0.0
    a_hat = np.where(degenerate, 0.0, a_hat)

    residual = np.abs(cubic_value(a_hat, b, c, d)) / cubic_scale(a_hat, b, c, d)
    residual = np.where(degenerate, 0.0, residual)
    in_interval = has_inside | degenerate
    return a_hat, residual, count, in_interval


def solve_margin_cubic(ip, nu, nv, mx, my, k) -> CubicSolution:
    """Scalar margin cubic solve; see solve_margin_cubics_vec."""
    if mx < 0.0 or my < 0.0:
        raise ParameterError("marginal moments must be non-negative")
    if k < 1:
        raise ParameterError(f"sketch width k must be >= 1, got {k}")
    a, res, count, inside = solve_margin_cubics_vec(
        np.float64(ip), np.float64(nu), np.float64(nv), np.float64(mx), np.float64(my), k
    )
    return CubicSolution(float(a), float(res), int(count), bool(inside))


# (s, t) exponent pairs of the three refined inner products for p = 4, with
# the marginal orders each cubic consumes.
_MLE_TERMS = ((2, 2, 6), (3, 1, -4), (1, 3, -4))


def _mle_vectors(sk: RowSketch, power: int, term: int) -> np.ndarray:
    if sk.config.strategy == BASIC:
        return sk.vector(power, 0)
    return sk.vector(power, term)


def estimate_margin_mle(sa: RowSketch, sb: RowSketch, clamp: bool = False) -> DistanceEstimate:
    """Margin-refined estimator for p = 4.

    Built for alternative-strategy sketches; basic sketches are accepted but
    flagged, since the independence assumptions behind the asymptotic
    variance no longer hold.
    """
    _check_compatible(sa, sb)
    cfg = sa.config
    if cfg.p != 4:
        raise IncompatibleSketchError(f"margin MLE is implemented for p=4 only, got p={cfg.p}")
    k = cfg.k

    flags: list[str] = []
    if cfg.strategy == BASIC:
        flags.append("mle-on-basic-strategy")

    value = sa.marginal(4) + sb.marginal(4)
    for s, t, weight in _MLE_TERMS:
        # Term Sum x^s y^t lives under matrix index t in the alternative scheme.
        u = _mle_vectors(sa, s, t)
        v = _mle_vectors(sb, t, t)
        ip = float(np.dot(u, v))
        sol = solve_margin_cubic(
            ip,
            float(np.dot(u, u)),
            float(np.dot(v, v)),
            sa.marginal(2 * s),
            sb.marginal(2 * t),
            k,
        )
        if sol.in_interval and sol.residual <= RESIDUAL_TOL:
            value += weight * sol.a_hat
        else:
            value += weight * (ip / k)
            flags.append(f"cubic-fallback-{s}{t}")

    value, clamped = _finalize(value, clamp)
    return DistanceEstimate(
        sa.row_id, sb.row_id, 4, value, MLE_ESTIMATOR, clamped, tuple(flags)
    )


_ESTIMATORS = {
    BASIC_ESTIMATOR: estimate_basic,
    ALTERNATIVE_ESTIMATOR: estimate_alternative,
    MLE_ESTIMATOR: estimate_margin_mle,
}


def all_pairs(sketches: list[RowSketch], estimator: str, clamp: bool = False) -> list[DistanceEstimate]:
    """Estimates for every pair (i, j), i < j, ordered by (i, j).

    The lower row index always plays the x role, which makes the inherently
    asymmetric estimators deterministic.
    """
    if estimator not in _ESTIMATORS:
        raise ParameterError(f"unknown estimator {estimator!r}")
    fn = _ESTIMATORS[estimator]
    for sk in sketches[1:]:
        if sk.config != sketches[0].config:
            raise IncompatibleSketchError(
                f"sketch config for row {sk.row_id} differs from row {sketches[0].row_id}"
            )
    ordered = sorted(sketches, key=lambda sk: sk.row_id)
    out = []
    for a in range(len(ordered)):
        for b in range(a + 1, len(ordered)):
            out.append(fn(ordered[a], ordered[b], clamp=clamp))
    return out
