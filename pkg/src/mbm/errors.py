"""Exception hierarchy shared across the package.

The split matters to batch callers: DataError means the inputs were bad,
ConvergenceError means the numerics gave up, DomainError means a utility
function was evaluated outside its admissible consumption range.
"""


class MbmError(Exception):
    """Base class for all package errors."""


class DataError(MbmError):
    """Malformed or inconsistent input data (ticks, config, samples)."""


class DomainError(MbmError):
    """Consumption or parameter outside the admissible domain."""


class ConvergenceError(MbmError):
    """A numerical solve failed to reach its residual contract."""
