"""Exception types shared across the package."""


class LcgeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidIndexError(LcgeError, ValueError):
    """A coordinate lies outside the lattice it refers to."""


class PreconditionError(LcgeError, ValueError):
    """An operation was called with arguments violating its contract."""


class ValidationError(LcgeError, ValueError):
    """An instance or solution failed semantic validation."""


class ParseError(LcgeError, ValueError):
    """A file could not be parsed; ``where`` locates the offending field."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ModelTooLarge(LcgeError, MemoryError):
    """Constraint generation or search exceeded its configured memory cap."""


class BoundViolation(LcgeError, AssertionError):
    """Model statistics exceed a proven count bound (constraint generation bug)."""
