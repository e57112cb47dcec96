"""Exception hierarchy shared by the library and the CLI."""


class TcReconError(Exception):
    """Base class for all errors raised by tcrecon."""


class InputError(TcReconError):
    """Well-formed input that violates a structural or referential contract."""


class ParseError(TcReconError):
    """Syntactically malformed input text."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class PreconditionError(TcReconError):
    """An operation was called outside its documented precondition."""


class UnsupportedShapeError(TcReconError):
    """The operation only supports binary trees."""


class SizeCapError(TcReconError):
    """A brute-force routine would exceed its configured size cap."""


class InternalInvariantError(TcReconError):
    """A property guaranteed by construction did not hold (a bug)."""
