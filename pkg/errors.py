"""
Error hierarchy for the Buffon toolkit.

Library code raises these; only the command line entry point turns them
into exit codes and machine-readable JSON on stderr.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3
EXIT_NO_CONVERGENCE = 4


class BuffonError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI error channel."""
        payload = {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
        }
        if self.details:
            payload['details'] = {k: _jsonable(v) for k, v in self.details.items()}
        return payload


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


class ValidationError(BuffonError):
    exit_code = EXIT_VALIDATION


class NonManifoldEdge(ValidationError):
    pass


class EulerViolation(ValidationError):
    pass


class DegenerateFace(ValidationError):
    pass


class Disconnected(ValidationError):
    pass


class UnknownSeed(ValidationError):
    pass


class NotSimplicial(ValidationError):
    pass


class NotConvex(ValidationError):
    pass


class OriginOutside(ValidationError):
    pass


class FaceNotPlanar(ValidationError):
    pass


class SingularFit(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class ToleranceAmbiguity(ValidationError):
    """Two eigenvalue groups sit closer than the ambiguity window."""


class SearchBudgetExceeded(ValidationError):
    pass


class ParseError(BuffonError):
    exit_code = EXIT_PARSE

    def __init__(self, message: str, line_number: Optional[int] = None, **details: Any):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, line_number=line_number, **details)
        self.line_number = line_number


class NoConvergence(BuffonError):
    exit_code = EXIT_NO_CONVERGENCE

    def __init__(self, message: str, steps: int = 0, last_change: float = float('nan'), **details: Any):
        super().__init__(message, steps=steps, last_change=last_change, **details)
        self.steps = steps
        self.last_change = last_change
