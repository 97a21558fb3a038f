"""Exception hierarchy shared by the library and the command line."""


class CredibilityError(ValueError):
    """Base class for all errors raised by :mod:`ancred`."""


class DomainError(CredibilityError):
    """An argument lies outside the domain of the function."""


class DegenerateTableError(DomainError):
    """A 2x2 table has a zero cell, so the log relative risk has no Wald estimate."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NotSignificantError(CredibilityError):
    """The estimate is not significant at the requested level, so no sceptical prior exists."""


class NoSolutionError(CredibilityError):
    """The extrinsic credibility equation has no root below one."""


class BracketError(CredibilityError):
    """The root finder was given a bracket without a sign change."""


class ConvergenceError(CredibilityError):
    """The root finder exhausted its iteration budget."""
