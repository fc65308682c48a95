"""Exception types shared across the package."""


class HaarqError(Exception):
    """Base class for all package errors."""


class InvalidParameter(HaarqError, ValueError):
    """Raised for out-of-range or mis-shaped arguments."""


class PromiseViolation(HaarqError):
    """Raised when an oracle or tree does not satisfy the required promise."""


class NonConvergence(HaarqError):
    """Raised when a numerical routine fails to reach its tolerance."""
