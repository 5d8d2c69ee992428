"""Exception hierarchy shared by all modules."""


class TpaError(Exception):
    """Base class for every error raised by this package."""


class NoGuidedMode(TpaError):
    pass


class NonConvergence(TpaError):
    pass


class InvalidEigenvalue(TpaError):
    pass


class AccuracyDomainExceeded(TpaError):
    pass


class PointInsideCore(TpaError):
    pass


class GridTooCoarse(TpaError):
    pass


class StepFailure(TpaError):
    pass


class AspectRatioViolation(TpaError):
    pass


class NotUnimodal(TpaError):
    pass


class ConfigError(TpaError):
    """Malformed or invalid scenario configuration; ``key`` names the culprit."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class OutputError(TpaError, OSError):
    """Raised when a result file cannot be written."""
