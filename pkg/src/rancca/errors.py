"""Exception hierarchy shared by every rancca module."""


class RanCcaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RanCcaError, ValueError):
    """Malformed KPI CSV input (ragged rows, empty cells, bad numbers)."""


class OrderError(RanCcaError, ValueError):
    """Timestamps that are not strictly increasing at a one-hour step."""


class AlignmentError(RanCcaError, ValueError):
    """Frames whose timestamp sets do not intersect."""


class DegenerateColumnError(RanCcaError, ValueError):
    """A zero-variance column where a nonconstant one is required."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class UnknownKpiError(RanCcaError, KeyError):
    """A requested KPI name is absent from a frame."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SingleFrameError(RanCcaError, ValueError):
    """Cross-variable pairing was given fewer than two cells."""


class ShapeError(RanCcaError, ValueError):
    """Array or dataset dimensions incompatible with the operation."""


class UnderdeterminedError(RanCcaError, ValueError):
    """Too few observations for the number of variables in a block."""


class SingularCovarianceError(RanCcaError, ValueError):
    """A within-block covariance is numerically singular and no ridge was given."""

    def __init__(self, message, block=None, suggested_ridge=None):
        super().__init__(message)
        self.block = block
        self.suggested_ridge = suggested_ridge


class ConfigError(RanCcaError, ValueError):
    """Invalid simulator configuration file or value."""


class ExportError(RanCcaError, OSError):
    """Failure writing artifacts to disk."""
