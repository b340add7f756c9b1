"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter/domain problems are usage
errors (1), malformed or missing inputs are data errors (2), and quadrature
failures are numerical errors (3).
"""


class ParameterError(ValueError):
    """A distribution or model was built with invalid parameters."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ClassificationError(ValueError):
    """A limit family does not match the parent's domain of attraction."""


class DataError(RuntimeError):
    """Input data is missing, malformed, or unusable."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target.

    Carries the achieved error estimate so callers can decide whether the
    partial result is still usable.
    """

    def __init__(self, message: str, achieved_error: float | None = None):
        super().__init__(message)
        self.achieved_error = achieved_error
