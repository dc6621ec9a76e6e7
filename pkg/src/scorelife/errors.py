"""Exception hierarchy shared across the package."""


class ScoreLifeError(Exception):
    """Base class for all package errors."""


class EncodingError(ScoreLifeError):
    """Action codes cannot be encoded (bad base, out-of-range code)."""


class BaseMismatchError(EncodingError):
    """Operands carry different digit bases."""


class SystemConstructionError(ScoreLifeError):
    """A policy life-value system could not be assembled exactly."""


class TransformDomainError(ScoreLifeError):
    """A transformed life argument left [0, 1)."""


class FitError(ScoreLifeError):
    """A regression failed (rank deficiency, non-convergence)."""


class ConfigError(ScoreLifeError):
    """Invalid experiment configuration."""


class DigitPaddingWarning(UserWarning):
    """A digit string was implicitly padded with zeros."""
