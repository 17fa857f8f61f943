"""Core data types and exact ground-truth computations.

Everything here is deterministic and exact (up to float rounding): the
even-order binomial decomposition, the l_p distance, and the joint moment
table that feeds every variance formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DataError, DimensionMismatchError, UnsupportedOrderError

MAX_ORDER = 16


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DataError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise DataError(f"non-finite entry at coordinate {bad}")
    return v


def check_even_order(p: int) -> int:
    """Validate an even order p and return it as a plain int."""
    if not isinstance(p, (int, np.integer)):
        raise UnsupportedOrderError(f"order must be an integer, got {p!r}")
    p = int(p)
    if p < 2 or p % 2 != 0:
        raise UnsupportedOrderError(f"order must be even and >= 2, got {p}")
    if p > MAX_ORDER:
        raise UnsupportedOrderError(f"order {p} exceeds supported maximum {MAX_ORDER}")
    return p


@dataclass(frozen=True)
class DataMatrix:
    """An n x D matrix of finite reals whose pairwise distances are estimated."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(f"expected an n x D matrix with n,D >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            i, j = (int(a[0]) for a in np.nonzero(~np.isfinite(v)))
            raise DataError(f"non-finite entry at row {i}, column {j}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.values[i]


@dataclass(frozen=True)
class DecompositionCoefficients:
    """Signed binomial weights c_t = (-1)^t * C(p, t), t = 0..p.

    c_0 and c_p weight the two marginal norms; the middle p-1 entries weight
    the inner products of orders (p-t, t).
    """

    p: int
    coeffs: tuple[int, ...]

    def __getitem__(self, t: int) -> int:
        return self.coeffs[t]


def decomposition_coefficients(p: int) -> DecompositionCoefficients:
    """Expansion weights of |x - y|^p into powers x^(p-t) y^t for even p."""
    p = check_even_order(p)
    coeffs = tuple((-1) ** t * comb(p, t) for t in range(p + 1))
    return DecompositionCoefficients(p=p, coeffs=coeffs)


def exact_lp_distance(x, y, p: int) -> float:
    """Sum_i |x_i - y_i|^p, computed directly."""
    p = check_even_order(p)
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    d = np.abs(x - y)
    return float(np.sum(d**p))


def vector_powers(x: np.ndarray, max_power: int) -> np.ndarray:
    """Stack [x^0, x^1, ..., x^max_power] by iterated multiplication.

    Iterated products keep small-integer data exact and avoid pow() cost.
    """
    out = np.empty((max_power + 1, x.shape[0]), dtype=np.float64)
    out[0] = 1.0
    for t in range(1, max_power + 1):
        out[t] = out[t - 1] * x
    return out


@dataclass(frozen=True)
class JointMomentTable:
    """M[s, t] = Sum_i x_i^s y_i^t for 0 <= s, t <= max_order."""

    max_order: int
    M: np.ndarray

    def __getitem__(self, st: tuple[int, int]) -> float:
        s, t = st
        return float(self.M[s, t])


def joint_moments(x, y, max_order: int) -> JointMomentTable:
    """All mixed moments Sum_i x_i^s y_i^t up to a given order.

    The matmul below sums each moment with numpy's pairwise (tree)
    accumulation, which keeps rounding under control for large D.
    """
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if max_order < 0:
        raise UnsupportedOrderError(f"max_order must be >= 0, got {max_order}")
    xp = vector_powers(x, max_order)
    yp = vector_powers(y, max_order)
    return JointMomentTable(max_order=max_order, M=xp @ yp.T)


def decomposed_lp_distance(x, y, p: int) -> float:
    """l_p distance evaluated through the binomial decomposition.

    Equals exact_lp_distance up to rounding; the identity is what the whole
    sketching approach rests on.
    """
    p = check_even_order(p)
    table = joint_moments(x, y, p)
    c = decomposition_coefficients(p)
    return float(sum(c[t] * table.M[p - t, t] for t in range(p + 1)))
