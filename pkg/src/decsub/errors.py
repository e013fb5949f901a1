"""Shared exception types."""


class DecsubError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(DecsubError):
    """An argument violates a documented precondition."""


class TopologyGenerationError(DecsubError):
    """Random graph generation failed to produce a connected graph."""


class AssumptionViolatedError(DecsubError):
    """An input fails a validation required by the algorithms."""


class PreconditionViolationError(DecsubError):
    """A runtime precondition (e.g. f(0) = 0) does not hold."""


class DataInsufficientError(DecsubError):
    """Not enough input data to build the requested experiment."""


class ParseError(DecsubError):
    """Malformed input file."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class AuditFailureError(DecsubError):
    """Observed counters disagree with the expected complexity table."""
