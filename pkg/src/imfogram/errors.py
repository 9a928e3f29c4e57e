"""Exception types shared across the package."""


class TrendSignalError(ValueError):
    """Raised when an operation needs an oscillating signal but got a trend
    (fewer than 2 interior extrema)."""


class UnsupportedOperationError(RuntimeError):
    """Raised when internal decomposition state is required but unavailable,
    e.g. multiplier bookkeeping for an externally supplied decomposition."""
