"""Exception hierarchy shared by every module of the package."""


class QuantDEAError(Exception):
    """Base class for all errors raised by quantdea."""


class DataError(QuantDEAError, ValueError):
    """Malformed, negative or dimensionally inconsistent production data."""


class PreconditionError(QuantDEAError, ValueError):
    """An operation was called with arguments outside its domain."""


class NumericalFailure(QuantDEAError, ArithmeticError):
    """Overflow, cycling or an internally inconsistent LP result."""
