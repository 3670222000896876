"""Exception taxonomy.

Two families, matching the CLI exit-code contract: DataError (bad or
degenerate input, exit code 2) and NumericError (optimization or
evaluation failure, exit code 3).
"""


class MrcError(Exception):
    """Base class for all package errors."""


class DataError(MrcError):
    """Input data is malformed, out of domain, or degenerate."""


class SchemaError(DataError):
    """A required column or field is missing."""


class ParseError(DataError):
    """A cell failed to parse; message carries the CSV line number."""


class DomainError(DataError):
    """A value violates its domain (negative outcome, h <= 0, ...)."""


class UnsupportedDesignError(DataError):
    """The covariate design is not testable (p < 2, intercept column)."""


class DegenerateDataError(DataError):
    """The data carries no rank information (all outcomes tied)."""


class NumericError(MrcError):
    """A numeric procedure failed."""


class ConstraintError(NumericError):
    """A vector violates the unit-norm constraint."""


class OptimizationFailedError(NumericError):
    """Every optimizer start failed."""


class TestFailedError(NumericError):
    """The test could not produce a point estimate."""


class TestUnreliableError(NumericError):
    """Too many resamples failed for the p-values to be trusted."""


class EvaluationError(NumericError):
    """A likelihood or objective evaluation returned a non-finite value."""
