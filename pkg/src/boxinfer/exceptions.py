"""Exception types raised across the package."""


class BoxinferError(Exception):
    """Base class for all package errors."""


class DomainError(BoxinferError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ConvergenceError(BoxinferError, RuntimeError):
    """An iterative solver failed to reach its tolerance within its budget."""


class DegenerateLabelsError(BoxinferError, ValueError):
    """A binary regression received labels of a single class."""


class DegenerateSupportError(BoxinferError, ValueError):
    """A conditional density has no probability mass on its grid."""


class RangeError(BoxinferError, ValueError):
    """A point falls outside the support covered by a density grid."""


class ConfigError(BoxinferError, ValueError):
    """An experiment or inference configuration is invalid."""


class NumericError(BoxinferError, RuntimeError):
    """A numeric procedure failed in a way that invalidates the run."""
