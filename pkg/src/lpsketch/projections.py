"""Seed-addressable projection matrix entries.

Entries are generated counter-based: the Philox4x64 key encodes
(master_seed, matrix_index, projection_row), so any row of any projection
matrix can be regenerated independently, in any order, without ever holding
the full D x k matrix. Row i of matrix m under master seed S uses the Philox
key [S, (m << 48) | i]; its k entries are the first k draws of that stream.

The fixed, documented uniform->variate transforms (so sketch files reproduce
bit-exactly across platforms):

- raw 64-bit words w become uniforms u = ((w >> 11) + 0.5) * 2^-53, strictly
  inside (0, 1);
- Normal: inverse normal CDF, scipy.special.ndtri(u);
- Uniform: sqrt(3) * (2u - 1), i.e. Uniform(-sqrt(3), sqrt(3));
- ThreePoint(s): +sqrt(s) if u < 1/(2s), -sqrt(s) if u > 1 - 1/(2s), else 0.

All families have mean 0 and unit variance; the fourth moment is 3 (normal),
9/5 (uniform) or the parameter s (three-point).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .errors import ParameterError

_MATRIX_INDEX_BITS = 48
_MAX_MATRIX_INDEX = 1 << 16
_MAX_ROW_INDEX = 1 << _MATRIX_INDEX_BITS

NORMAL = "normal"
UNIFORM = "uniform"
THREEPOINT = "threepoint"
_FAMILIES = (NORMAL, UNIFORM, THREEPOINT)


@dataclass(frozen=True)
class ProjectionFamily:
    """Distribution of the i.i.d. projection entries."""

    kind: str
    s: float | None = None

    def __post_init__(self):
        if self.kind not in _FAMILIES:
            raise ParameterError(f"unknown projection family {self.kind!r}")
        if self.kind == THREEPOINT:
            if self.s is None or self.s < 1.0:
                raise ParameterError(f"three-point family requires s >= 1, got {self.s}")
        elif self.s is not None:
            raise ParameterError(f"family {self.kind!r} does not take an s parameter")


def moment_s(family: ProjectionFamily) -> float:
    """Analytic fourth moment E(r^4) of a family."""
    if family.kind == NORMAL:
        return 3.0
    if family.kind == UNIFORM:
        return 9.0 / 5.0
    return float(family.s)


@dataclass(frozen=True)
class MatrixKey:
    """Identity of one projection matrix: distinct keys give independent streams."""

    master_seed: int
    matrix_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 1 << 64:
            raise ParameterError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if not 0 <= self.matrix_index < _MAX_MATRIX_INDEX:
            raise ParameterError(f"matrix_index out of range: {self.matrix_index}")


def _raw_row(key: MatrixKey, i: int, k: int) -> np.ndarray:
    if not 0 <= i < _MAX_ROW_INDEX:
        raise ParameterError(f"row index out of range: {i}")
    philox_key = [key.master_seed, (key.matrix_index << _MATRIX_INDEX_BITS) | i]
    gen = Generator(Philox(key=philox_key))
    return gen.integers(0, 1 << 64, size=k, dtype=np.uint64)


def uniforms_from_raw(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to uniforms strictly inside (0, 1)."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def variates_from_uniforms(u: np.ndarray, family: ProjectionFamily) -> np.ndarray:
    """Apply the family's fixed uniform->variate transform."""
    if family.kind == NORMAL:
        return ndtri(u)
    if family.kind == UNIFORM:
        return np.sqrt(3.0) * (2.0 * u - 1.0)
    s = float(family.s)
    root = np.sqrt(s)
    half = 1.0 / (2.0 * s)
    return np.where(u < half, root, np.where(u > 1.0 - half, -root, 0.0))


def entry_row(key: MatrixKey, i: int, k: int, family: ProjectionFamily) -> np.ndarray:
    """Row i (length k) of the projection matrix identified by key."""
    return variates_from_uniforms(uniforms_from_raw(_raw_row(key, i, k)), family)


def entry(key: MatrixKey, i: int, j: int, family: ProjectionFamily) -> float:
    """Single entry r_ij; a pure function of (key, i, j, family)."""
    if j < 0:
        raise ParameterError(f"column index out of range: {j}")
    return float(entry_row(key, i, j + 1, family)[j])


class ProjectionStream:
    """Row-of-R access for a fixed master seed and family.

    Thin convenience wrapper used by the sketcher; stateless apart from the
    immutable seed/family, so safe to share across workers.
    """

    def __init__(self, master_seed: int, family: ProjectionFamily):
        self.master_seed = master_seed
        self.family = family

    def row(self, matrix_index: int, i: int, k: int) -> np.ndarray:
        key = MatrixKey(self.master_seed, matrix_index)
        return entry_row(key, i, k, self.family)


def derive_seed(master_seed: int, index: int) -> int:
    """Mix a master seed with an index (splitmix64 finalizer)."""
    z = (master_seed + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)
