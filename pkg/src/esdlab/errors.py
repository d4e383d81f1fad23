"""Exception types shared across the package."""


class EsdlabError(Exception):
    """Base class for all package errors."""


class DimensionError(EsdlabError, ValueError):
    """Matrix shape does not match the declared subsystem dimensions."""


class PhysicalityError(EsdlabError, ValueError):
    """Input violates trace, Hermiticity or positivity requirements."""


class ParameterError(EsdlabError, ValueError):
    """A scalar parameter lies outside its allowed range."""


class ConvergenceError(EsdlabError, RuntimeError):
    """An iterative routine failed to reach its tolerance."""
