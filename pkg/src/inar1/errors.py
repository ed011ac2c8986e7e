"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class InvalidSpecError(ValueError):
    """An innovation distribution failed validation."""


class DegeneratePathError(ValueError):
    """A statistic is undefined for the observed path (e.g. zero denominator)."""


class UndefinedRatioError(ValueError):
    """Both measures assign probability zero, so the likelihood ratio is undefined."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
