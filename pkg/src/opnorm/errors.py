"""Exception types raised across the package."""


class OpNormError(ValueError):
    """Base class for all package errors."""


class InvalidInputError(OpNormError):
    pass


class FormatError(OpNormError):
    """Malformed matrix or graph file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SizeError(OpNormError):
    pass


class PreconditionError(OpNormError):
    pass
