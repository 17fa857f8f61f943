"""Sketching even-order l_p distances with power random projections."""

from .analytics import (
    VarianceReport,
    delta4,
    delta6,
    monte_carlo_validate,
    simulate_estimates,
    variance_alternative_p4,
    variance_alternative_p6,
    variance_basic_p4,
    variance_basic_p6,
    variance_mle_p4,
    variance_subgaussian_p4,
)
from .errors import (
    DataError,
    DimensionMismatchError,
    IncompatibleSketchError,
    LpSketchError,
    ParameterError,
    UnsupportedOrderError,
)
from .estimators import (
    CubicSolution,
    DistanceEstimate,
    all_pairs,
    estimate_alternative,
    estimate_basic,
    estimate_margin_mle,
    solve_margin_cubic,
)
from .io import load_csv, read_sketch_file, write_sketch_file
from .model import (
    DataMatrix,
    DecompositionCoefficients,
    JointMomentTable,
    decomposed_lp_distance,
    decomposition_coefficients,
    exact_lp_distance,
    joint_moments,
)
from .projections import MatrixKey, ProjectionFamily, entry, entry_row, moment_s
from .sketcher import RowSketch, SketchConfig, sketch_matrix, sketch_row

__all__ = [name for name in dir() if not name.startswith("_")]
