"""One-pass row sketching: power projections plus exact marginal moments.

A row x of the data matrix is compressed into the vectors
u_t[j] = Sum_i x_i^t r_ij (t = 1..p-1) together with the exact marginals
m_t = Sum_i x_i^t up to order 2p-2. Which projection matrix supplies r for
each power is dictated by the strategy:

- Basic: one matrix (index 0) for every power;
- Alternative: the inner-product term Sum x^(p-t) y^t is estimated under
  matrix index t, so a row stores power p-t under matrix t (x role) and
  power t under matrix t (y role), 2p-3 distinct vectors after the t = p/2
  pair collapses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParameterError
from .model import DataMatrix, check_even_order, vector_powers
from .projections import NORMAL, ProjectionFamily, ProjectionStream

BASIC = "basic"
ALTERNATIVE = "alternative"

_BLOCK = 4096


@dataclass(frozen=True)
class SketchConfig:
    """Everything needed to sketch reproducibly and to pair sketches later."""

    p: int
    k: int
    strategy: str = BASIC
    family: ProjectionFamily = field(default_factory=lambda: ProjectionFamily(NORMAL))
    master_seed: int = 0

    def __post_init__(self):
        check_even_order(self.p)
        if self.k < 1:
            raise ParameterError(f"sketch width k must be >= 1, got {self.k}")
        if self.strategy not in (BASIC, ALTERNATIVE):
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.strategy == ALTERNATIVE and self.p not in (4, 6):
            raise ParameterError(
                f"alternative strategy is implemented for p in {{4, 6}}, got p={self.p}"
            )

    @property
    def max_marginal_order(self) -> int:
        return 2 * self.p - 2

    def vector_slots(self) -> list[tuple[int, int]]:
        """Stored (power, matrix_index) pairs, in canonical serialization order."""
        p = self.p
        if self.strategy == BASIC:
            return [(t, 0) for t in range(1, p)]
        slots = []
        for m in range(1, p):
            for power in sorted({m, p - m}):
                slots.append((power, m))
        return slots


@dataclass
class RowSketch:
    """Compressed representation of one row."""

    row_id: int
    config: SketchConfig
    marginals: np.ndarray  # marginals[t-1] = Sum_i x_i^t, t = 1..2p-2
    vectors: dict[tuple[int, int], np.ndarray]  # (power, matrix_index) -> length-k

    def marginal(self, t: int) -> float:
        return float(self.marginals[t - 1])

    def vector(self, power: int, matrix_index: int) -> np.ndarray:
        return self.vectors[(power, matrix_index)]


def _row_powers(values: np.ndarray, max_power: int, row_offset: int = 0) -> np.ndarray:
    """Powers [1..max_power] of every row; raises on overflow to Inf."""
    n, D = values.shape
    out = np.empty((n, max_power, D), dtype=np.float64)
    out[:, 0] = values
    with np.errstate(over="ignore"):
        for t in range(1, max_power):
            out[:, t] = out[:, t - 1] * values
    if not np.all(np.isfinite(out)):
        r, _, c = (int(a[0]) for a in np.nonzero(~np.isfinite(out)))
        raise DataError(
            f"power overflow in row {row_offset + r}, coordinate {c}"
        )
    return out


def _sketch_rows(values: np.ndarray, config: SketchConfig, stream) -> list[RowSketch]:
    n, D = values.shape
    maxpow = config.max_marginal_order
    powers = _row_powers(values, maxpow)  # (n, maxpow, D)
    # Per-row reductions keep a row's sketch bit-identical no matter how many
    # other rows are sketched alongside it.
    marginals = np.stack([powers[r].sum(axis=1) for r in range(n)])

    slots = config.vector_slots()
    by_matrix: dict[int, list[int]] = {}
    for power, m in slots:
        by_matrix.setdefault(m, []).append(power)

    vecs = {slot: np.zeros((n, config.k)) for slot in slots}
    # Stream over projection rows in blocks: each matrix row is generated
    # once and applied to every data row, so R is never fully materialized.
    for m, powlist in by_matrix.items():
        for i0 in range(0, D, _BLOCK):
            i1 = min(i0 + _BLOCK, D)
            rblock = np.stack([stream.row(m, i, config.k) for i in range(i0, i1)])
            for power in powlist:
                for r in range(n):
                    vecs[(power, m)][r] += powers[r, power - 1, i0:i1] @ rblock

    return [
        RowSketch(
            row_id=r,
            config=config,
            marginals=marginals[r].copy(),
            vectors={slot: vecs[slot][r].copy() for slot in slots},
        )
        for r in range(n)
    ]


def sketch_row(x, config: SketchConfig, stream=None, row_id: int = 0) -> RowSketch:
    """Sketch a single vector. `stream` may override the projection source
    (tests pin entries through it); by default it derives from the config."""
    if stream is None:
        stream = ProjectionStream(config.master_seed, config.family)
    values = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(values)):
        c = int(np.flatnonzero(~np.isfinite(values[0]))[0])
        raise DataError(f"non-finite entry in row {row_id}, coordinate {c}")
    sk = _sketch_rows(values, config, stream)[0]
    sk.row_id = row_id
    return sk


def sketch_matrix(A: DataMatrix, config: SketchConfig, stream=None) -> list[RowSketch]:
    """Sketch every row of A; deterministic regardless of traversal order."""
    if stream is None:
        stream = ProjectionStream(config.master_seed, config.family)
    return _sketch_rows(A.values, config, stream)
