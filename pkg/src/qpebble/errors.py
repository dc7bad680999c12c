"""Exception types shared across the package."""


class PebbleError(Exception):
    """Base class for all errors raised by qpebble."""


class InvalidParameterError(PebbleError, ValueError):
    """A numeric or structural argument is out of its allowed range."""


class ParseError(PebbleError, ValueError):
    """A text file does not conform to its declared format."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidTraceError(PebbleError, ValueError):
    """A trace references nodes outside the graph or is otherwise malformed.

    Distinct from a legality violation: a malformed trace cannot be judged.
    """


class PreconditionError(PebbleError, ValueError):
    """An operation's input does not satisfy its documented precondition."""
