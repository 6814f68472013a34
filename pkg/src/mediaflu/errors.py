"""Exception types raised across the package.

Every failure mode a caller might want to branch on gets its own class;
all inherit from MediafluError so `except MediafluError` catches the lot.
"""


class MediafluError(Exception):
    """Base class for all mediaflu errors."""


class ParameterDomainError(MediafluError, ValueError):
    """A model or media-function parameter is outside its allowed domain."""


class ModelVariantError(MediafluError, ValueError):
    """A state or operation was used with the wrong compartmental variant."""


class IntegrationBlowupError(MediafluError, ArithmeticError):
    """The integrator produced a non-finite state."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class EmptyInputError(MediafluError, ValueError):
    """An operation that needs at least one element received none."""


class CoverageError(MediafluError, ValueError):
    """A trajectory is too short for the requested observation window."""


class TruncatedWindowError(MediafluError, ValueError):
    """The requested fit window does not fit inside the series.

    `feasible` carries the largest in-bounds window (or None if fewer than
    two points remain).
    """

    def __init__(self, message: str, feasible=None):
        self.feasible = feasible
        super().__init__(message)


class InfeasibleInitializationError(MediafluError, ValueError):
    """Initial-condition construction produced a non-positive susceptible pool."""


class SampleTooSmallError(MediafluError, ValueError):
    """Too few observations for the requested information criterion."""


class DegenerateFitError(MediafluError, ValueError):
    """A fit with zero residual sum of squares cannot be scored."""


class ComparisonMismatchError(MediafluError, ValueError):
    """Model scores being compared were not computed on the same data."""


class UndefinedCorrelationError(MediafluError, ValueError):
    """Correlation is undefined because one input has zero variance."""


class RankDeficiencyError(MediafluError, ValueError):
    """The regression design matrix does not have full column rank."""


class UndefinedTestError(MediafluError, ValueError):
    """A statistical test is degenerate for the given samples."""


class SchemaError(MediafluError, ValueError):
    """A CSV file does not follow the expected header or layout."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class CsvParseError(MediafluError, ValueError):
    """A CSV row holds an unparseable or out-of-domain value."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DuplicateKeyError(MediafluError, ValueError):
    """Two CSV rows share the same (season, week) key."""


class InsufficientOverlapError(MediafluError, ValueError):
    """Two weekly series share too few week labels to be joined."""


class FitFailureError(MediafluError, RuntimeError):
    """Every optimizer start failed; per-start diagnostics attached."""

    def __init__(self, message: str, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
