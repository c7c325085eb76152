"""Exception types shared by all modules."""


class MultiwellError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(MultiwellError, ValueError):
    """Invalid parameters, violated preconditions or malformed configuration."""


class ResolutionError(MultiwellError):
    """A discretization or truncation is too coarse for the requested quantity."""


class NumericalError(MultiwellError):
    """A numerical procedure failed (no convergence, breakdown, leakage)."""
