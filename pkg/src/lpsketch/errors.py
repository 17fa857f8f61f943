"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 2, data errors 3,
incompatibility errors 4.
"""


class LpSketchError(Exception):
    """Base class for all lpsketch errors."""


class ParameterError(LpSketchError):
    """Invalid parameter value (bad order, bad k, s < 1, ...)."""


class UnsupportedOrderError(ParameterError):
    """Order p is odd, non-positive, or outside the supported range."""


class DataError(LpSketchError):
    """Input data is unusable: NaN/Inf entries, non-numeric cells, overflow."""


class DimensionMismatchError(DataError):
    """Two vectors that must share a length do not."""


class IncompatibleSketchError(LpSketchError):
    """Sketches with mismatched configuration were combined."""
