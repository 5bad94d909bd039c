"""Exception hierarchy for the TDA engine.

Every error the engine raises derives from TdaError so the CLI can map
failures to a nonzero exit code and print the error class name.
"""


class TdaError(Exception):
    """Base class for all engine errors."""


class InvalidFeature(TdaError):
    """Feature vector is zero, non-finite, or otherwise unusable."""


class InvalidDimension(TdaError):
    """A dimension parameter is out of its valid range (e.g. N < 2)."""


class DimensionMismatch(TdaError):
    """Operands disagree on vector/matrix dimensions."""


class InvalidClass(TdaError):
    """Class id outside 0..N-1."""


class InvalidConfig(TdaError):
    """Configuration constraint violated; message names the field."""


class UnsupportedFormat(TdaError):
    """Dataset file has a bad magic or an unknown version."""


class CorruptDataset(TdaError):
    """Dataset file is truncated or internally inconsistent."""


class GridTooLarge(TdaError):
    """Grid-search cross product exceeds the configured combo limit."""


class NoDumpAvailable(TdaError):
    """Cache inspection requested but no dump file exists."""
