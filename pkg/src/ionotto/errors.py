"""Exception hierarchy shared across the package.

``ConfigError`` maps to CLI exit code 2, everything else derived from
``NumericalError`` maps to exit code 3.
"""


class IonottoError(Exception):
    """Base class for all package errors."""


class ConfigError(IonottoError):
    """Malformed input: bad config file, violated invariant, unknown key."""


class NumericalError(IonottoError):
    """Base class for runtime numerical failures."""


class OutOfTaperError(NumericalError):
    """Axial position left the trap interior (1 + gamma*z <= 0)."""


class DimensionError(NumericalError):
    """Fock dimension outside the range an operation supports."""


class TruncationError(NumericalError):
    """Fock truncation too small for the requested state."""


class ConvergenceError(NumericalError):
    """Polynomial propagator hit max order before meeting tolerance."""
