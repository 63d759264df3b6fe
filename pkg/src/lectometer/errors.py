"""Exception types raised by lectometer."""


class LectometerError(Exception):
    """Base class for all lectometer errors."""


class ParseError(LectometerError, ValueError):
    """Input could not be parsed.

    ``line`` is the 1-based line number when the input is line oriented.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ParseError):
    """Input parsed but violates a domain invariant."""


class UnsupportedFormatError(LectometerError, ValueError):
    pass


class RangeError(LectometerError, ValueError):
    pass


class DuplicateError(LectometerError, ValueError):
    pass


class CoverageError(LectometerError, ValueError):
    """Items or annotators are missing where complete coverage is required."""

    def __init__(self, message, missing=()):
        self.missing = tuple(missing)
        super().__init__(message)


class GeometryError(LectometerError, ValueError):
    pass


class OrderingError(LectometerError, ValueError):
    pass


class ShapeError(LectometerError, ValueError):
    pass


class DegenerateInputError(LectometerError, ValueError):
    pass


class EmptySessionError(LectometerError, ValueError):
    pass


class UsageError(LectometerError, ValueError):
    pass
