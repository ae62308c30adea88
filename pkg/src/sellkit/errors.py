"""Exception types raised across the package."""


class SellkitError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SellkitError, ValueError):
    """An argument value is outside its documented domain."""


class StructuralError(SellkitError, ValueError):
    """A matrix violates a structural invariant (bad indices, bad shapes)."""


class DimensionError(ParameterError):
    """Operand shapes are incompatible."""


class FormatError(SellkitError, ValueError):
    """A file being read does not match its declared on-disk format."""


class ResourceError(SellkitError, RuntimeError):
    """A requested resource (memory, threads, hardware counter) is unavailable."""
