"""Exception types shared across the package."""

__all__ = [
    "CrmError",
    "SupportError",
    "NaturalSpaceError",
    "DerivativeDomainError",
    "ConditionError",
    "DivergenceError",
    "TruncationError",
    "AtomLinkError",
    "ConfigError",
]


class CrmError(ValueError):
    """Base class for all package-specific errors."""


class SupportError(CrmError):
    """A point lies outside the support of a family or transform image."""


class NaturalSpaceError(CrmError):
    """A natural parameter vector lies outside the natural parameter space.

    Carries the index of the offending coordinate (1-based) when a single
    coordinate can be blamed.
    """

    def __init__(self, message, coord=None):
        super().__init__(message)
        self.coord = coord


class DerivativeDomainError(CrmError):
    """No admissible finite-difference step exists inside the natural space."""


class ConditionError(CrmError):
    """A context was built strictly but its condition report failed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DivergenceError(CrmError):
    """An integral failed to stabilize; carries the partial value."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TruncationError(CrmError):
    """A sampling region carries infinite base mass and must be restricted."""


class AtomLinkError(CrmError):
    """A weight could not be linked to an admissible likelihood parameter.

    Carries the location of the offending atom.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConfigError(CrmError):
    """A configuration document is malformed; message carries a JSON pointer."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer
