"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps each family onto an exit code, so library code raises the most
specific class available instead of bare ``ValueError``.
"""


class QtnError(Exception):
    """Base class for all package errors."""


class ValidationError(QtnError, ValueError):
    """Input violates a documented invariant or precondition."""


class ParseError(ValidationError):
    """Malformed input file. ``line`` is 1-based, or None when not line-oriented."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractViolation(ValidationError):
    """Caller broke an operation contract (e.g. non-adjacent gate on an MPS)."""


class FitError(ValidationError):
    """Scaling fit cannot be performed on the supplied points."""


class ResourceError(QtnError):
    """Requested size exceeds a configured cap or available memory."""


class RunTimeout(ResourceError):
    """Wall-clock budget of a benchmark run was exhausted."""


class NumericalIntegrityError(QtnError, ArithmeticError):
    """A quantity that must be real/normalized/Hermitian drifted past tolerance."""
