"""Exception types shared across the package."""


class QmlBoundsError(Exception):
    """Base class for package errors."""


class InvalidInputError(QmlBoundsError, ValueError):
    """Raised when an argument violates a documented precondition."""


class CapacityError(QmlBoundsError):
    """Raised when a requested system size exceeds the configured cap."""


class NumericError(QmlBoundsError):
    """Raised when a numeric routine fails to produce a usable result."""
