# phasefield_engine/exceptions.py - Error types raised by the engine


class PhaseFieldError(Exception):
    """Base class for every error raised by phasefield_engine."""


class ValidationError(PhaseFieldError, ValueError):
    """Malformed input data (tabulated samples, counts, grids)."""


class DomainError(PhaseFieldError, ValueError):
    """Argument outside the domain of the evaluated function."""


class LimitNotResolvedError(PhaseFieldError):
    """A numerical limit could not be classified from its samples."""

    def __init__(self, message: str, samples=None):
        super().__init__(message)
        self.samples = list(samples) if samples is not None else []


class ConfigurationError(PhaseFieldError):
    """Solver or scenario settings that cannot be honoured."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class HypothesisError(PhaseFieldError):
    """Raised in strict mode when a model hypothesis check fails."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
