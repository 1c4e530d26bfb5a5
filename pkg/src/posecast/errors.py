"""Exception hierarchy.

Two families matter to callers: validation problems (bad inputs, bad files,
bad shapes) and numerical degeneracies (rank-deficient or blown-up linear
algebra).  The CLI maps the former to exit code 1 and the latter to 2.
"""


class PosecastError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PosecastError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(InvalidInputError):
    """Input is structurally valid but geometrically degenerate (e.g. a
    zero-length limb that cannot be rescaled)."""


class SchemaError(InvalidInputError):
    """A file or record does not match its declared schema."""


class ParseError(SchemaError):
    """A file could not be parsed; carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(InvalidInputError):
    """Missing or inconsistent configuration (e.g. absent sidecar file)."""


class NumericalError(PosecastError, ArithmeticError):
    """Base class for numerical failures."""


class RankDeficiencyError(NumericalError):
    """The information matrix is singular; a ridge term would fix it."""


class NumericalDegeneracyError(NumericalError):
    """An online update produced a non-finite or non-positive quantity."""
