"""Exception hierarchy shared by every jetcanon module."""


class JetError(Exception):
    """Base class for all errors raised by jetcanon."""


class ParseError(JetError):
    """Malformed expression text.

    ``position`` is the 0-based character offset into the parsed string.
    """

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at column {position + 1})"
        super().__init__(message)


class UnknownIdentifier(ParseError):
    pass


class SingularError(JetError, ZeroDivisionError):
    """Division by zero, a zero denominator after substitution, or a singular Jacobian."""


class OrderLimitError(JetError):
    """A jet order beyond the bundle's configured hard limit was requested."""


class ShapeError(JetError, ValueError):
    """Dimension mismatch or an operator outside the supported shapes."""


class NonCanonicalError(JetError):
    """Raised when a transformation fails the canonicity check and no override was given."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
