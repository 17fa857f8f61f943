"""CSV ingestion and the binary sketch file format.

Sketch file layout (all little-endian, version 1):

    magic   4 bytes  ASCII "LPSK"
    version u32
    n       u64      row count
    D       u64      original column count
    p       u32
    k       u32
    strategy u32     0 = basic, 1 = alternative
    family  u32      0 = normal, 1 = uniform, 2 = threepoint
    s       f64      fourth moment of the family (3.0 for normal)
    seed    u64      master seed

followed by n row payloads, each: marginals m_1..m_{2p-2} as f64, then the
sketch vectors (k f64 each) in the canonical (power, matrix) order given by
SketchConfig.vector_slots(). The header fully determines the payload layout.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile

import numpy as np

from .errors import DataError, ParameterError
from .model import DataMatrix
from .projections import NORMAL, THREEPOINT, UNIFORM, ProjectionFamily, moment_s
from .sketcher import ALTERNATIVE, BASIC, RowSketch, SketchConfig

MAGIC = b"LPSK"
VERSION = 1
_HEADER = struct.Struct("<4sIQQIIIIdQ")

_STRATEGY_CODES = {BASIC: 0, ALTERNATIVE: 1}
_STRATEGY_NAMES = {v: k for k, v in _STRATEGY_CODES.items()}
_FAMILY_CODES = {NORMAL: 0, UNIFORM: 1, THREEPOINT: 2}
_FAMILY_NAMES = {v: k for k, v in _FAMILY_CODES.items()}


def load_csv(path: str, skip_header: bool = False) -> DataMatrix:
    """Dense numeric CSV -> DataMatrix, with cell-accurate error reporting."""
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader):
            if skip_header and lineno == 0:
                continue
            if not record:
                continue
            parsed = []
            for col, cell in enumerate(record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"non-numeric cell at row {lineno}, column {col}: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataError(f"no data rows in {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"ragged CSV: row widths {sorted(widths)}")
    return DataMatrix(np.array(rows, dtype=np.float64))


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write to a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lpsketch-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_sketch_file(path: str, sketches: list[RowSketch], D: int) -> None:
    if not sketches:
        raise DataError("refusing to write an empty sketch file")
    cfg = sketches[0].config
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        len(sketches),
        D,
        cfg.p,
        cfg.k,
        _STRATEGY_CODES[cfg.strategy],
        _FAMILY_CODES[cfg.family.kind],
        moment_s(cfg.family),
        cfg.master_seed,
    )
    slots = cfg.vector_slots()
    chunks = [header]
    for sk in sketches:
        if sk.config != cfg:
            raise DataError(f"row {sk.row_id} has a mismatching config")
        chunks.append(np.ascontiguousarray(sk.marginals, dtype="<f8").tobytes())
        for slot in slots:
            chunks.append(np.ascontiguousarray(sk.vectors[slot], dtype="<f8").tobytes())
    atomic_write_bytes(path, b"".join(chunks))


def read_sketch_file(path: str) -> tuple[list[RowSketch], int]:
    """Returns (sketches, D); round-trips write_sketch_file bit-exactly."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, version, n, D, p, k, strat, fam, s, seed = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    if strat not in _STRATEGY_NAMES or fam not in _FAMILY_NAMES:
        raise DataError(f"{path}: unknown strategy/family codes {strat}/{fam}")

    family_kind = _FAMILY_NAMES[fam]
    family = ProjectionFamily(family_kind, s if family_kind == THREEPOINT else None)
    cfg = SketchConfig(p=p, k=k, strategy=_STRATEGY_NAMES[strat], family=family, master_seed=seed)

    slots = cfg.vector_slots()
    n_marg = cfg.max_marginal_order
    row_bytes = 8 * (n_marg + k * len(slots))
    expected = _HEADER.size + n * row_bytes
    if len(blob) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(blob)}")

    sketches = []
    off = _HEADER.size
    for r in range(n):
        marg = np.frombuffer(blob, dtype="<f8", count=n_marg, offset=off).copy()
        off += 8 * n_marg
        vectors = {}
        for slot in slots:
            vectors[slot] = np.frombuffer(blob, dtype="<f8", count=k, offset=off).copy()
            off += 8 * k
        sketches.append(RowSketch(row_id=r, config=cfg, marginals=marg, vectors=vectors))
    return sketches, int(D)


def parse_family(name: str, s: float | None) -> ProjectionFamily:
    if name not in _FAMILY_CODES:
        raise ParameterError(f"unknown family {name!r}")
    if name == THREEPOINT:
        if s is None:
            raise ParameterError("three-point family requires --s")
        return ProjectionFamily(THREEPOINT, s)
    return ProjectionFamily(name)
