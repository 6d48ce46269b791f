"""Exception hierarchy shared across the package."""


class UnbError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UnbError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonConvergenceError(UnbError, RuntimeError):
    """A series or iteration hit its term cap before the stopping rule fired."""


class DataError(UnbError, ValueError):
    """Input data is malformed, missing, or inadmissible for the requested fit."""


class DegenerateDataError(DataError):
    """The data carries no information for the requested estimator (e.g. all zeros)."""


class UnderDispersionError(DataError):
    """The moment system has no admissible solution; the sample is not
    over-dispersed enough for this family."""


class RankDeficientError(DataError):
    """The design matrix does not have full column rank."""


class DegenerateVuongError(UnbError):
    """The two candidate models are observationally identical; the test
    statistic is undefined."""
