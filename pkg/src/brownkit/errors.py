"""Exception types raised across the package."""


class BrownkitError(Exception):
    """Base class for all package errors."""


class DomainError(BrownkitError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(BrownkitError, ValueError):
    """An operation was called on inputs that violate its precondition."""


class SpecError(BrownkitError, ValueError):
    """A generator description is inconsistent."""


class ConfigError(BrownkitError, ValueError):
    """An experiment configuration is invalid.

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
