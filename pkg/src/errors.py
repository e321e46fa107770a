"""
Error hierarchy for the Floquet emitter toolkit.

Numerical modules raise these; task handlers attach the task name and
main.py maps them to process exit codes.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class FloquetError(Exception):
    """Base class for all toolkit errors"""

    exit_code = EXIT_UNEXPECTED

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)
        self.task: Optional[str] = None

    def with_task(self, task: str) -> 'FloquetError':
        self.task = task
        return self

    def __str__(self) -> str:
        prefix = f"[{self.task}] " if self.task else ""
        if not self.context:
            return f"{prefix}{self.message}"
        details = ', '.join(f"{k}={v}" for k, v in self.context.items())
        return f"{prefix}{self.message} ({details})"


class InvalidParameterError(FloquetError, ValueError):
    """A physical parameter is outside its allowed range"""

    exit_code = EXIT_NUMERICAL


class ConfigError(FloquetError):
    """Run configuration could not be parsed or validated"""

    exit_code = EXIT_CONFIG

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, field: Optional[str] = None):
        super().__init__(message)
        self.path = path
        self.line = line
        self.field = field

    def __str__(self) -> str:
        parts = []
        if self.path:
            parts.append(str(self.path))
        if self.line is not None:
            parts.append(f"line {self.line}")
        if self.field:
            parts.append(f"field '{self.field}'")
        parts.append(self.message)
        return ': '.join(parts)


class RenderError(FloquetError):
    """Dataset could not be rendered"""

    exit_code = EXIT_CONFIG


class NumericalError(FloquetError):
    """Base class for numerical failures"""

    exit_code = EXIT_NUMERICAL


class ConvergenceError(NumericalError):
    """An iterative computation did not reach its tolerance"""


class IntegratorError(NumericalError):
    """Master-equation integration failed or violated a state invariant"""


class ResolutionError(NumericalError):
    """A frequency grid is too coarse for the requested computation"""


class WeakDriveError(NumericalError):
    """Drive amplitude is outside the weak-excitation regime"""


class TailTruncationError(NumericalError):
    """Emission window is too short to capture the radiated photon flux"""


class ZeroPhotonError(NumericalError):
    """A normalisation by the emitted photon number would divide by zero"""


class InsufficientSpanError(NumericalError):
    """A delay grid does not cover enough modulation periods"""
