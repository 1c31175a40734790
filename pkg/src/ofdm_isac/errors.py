"""Exception types raised by the simulator."""


class OfdmIsacError(Exception):
    """Base class for all simulator errors."""


class ConfigError(OfdmIsacError, ValueError):
    """A configuration value is missing, malformed or out of range."""


class PreconditionError(OfdmIsacError, ValueError):
    """A numerical precondition of an operation does not hold.

    Examples are delays that are not an integer number of samples, grids
    with mismatched dimensions or a window with zeros where it must be
    inverted.
    """
