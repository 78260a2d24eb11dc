"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class FitError(RuntimeError):
    """Curve fitting could not produce a usable estimate."""


class ConfigError(ValueError):
    """A config file or flag set cannot be interpreted."""
