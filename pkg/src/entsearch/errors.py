"""Exception hierarchy shared by all modules."""


class EntsearchError(Exception):
    """Base class for errors raised by this package."""


class ParseError(EntsearchError, ValueError):
    """Malformed formula input.

    ``line`` is 1-based when known, ``None`` otherwise.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class HeaderError(ParseError):
    pass


class LiteralRangeError(ParseError):
    pass


class UnterminatedClauseError(ParseError):
    pass


class EmptyClauseError(ParseError):
    pass


class UnbalancedParenError(ParseError):
    pass


class UnknownTokenError(ParseError):
    pass


class EmptyInputError(ParseError):
    pass


class CapExceededError(EntsearchError, ValueError):
    """An exhaustive or dense computation was asked to exceed its size cap."""
