"""
Exception hierarchy for tailvar.
"""


class TailVarError(Exception):
    """Base class for every error raised by tailvar."""


class DataError(TailVarError, ValueError):
    """Input data is missing, malformed or violates an operation's precondition."""


class EstimationError(TailVarError):
    """A numerical estimation step failed or produced an invalid result."""


class UsageError(TailVarError):
    """The command line was malformed or combined incompatible options."""
