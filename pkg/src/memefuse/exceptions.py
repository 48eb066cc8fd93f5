"""Exception hierarchy shared by all memefuse modules."""


class MemefuseError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(MemefuseError, ValueError):
    """Operands have incompatible shapes for the requested operation."""


class GraphError(MemefuseError, RuntimeError):
    """Misuse of the recorded computation graph (bad root, double backward)."""


class NumericsError(MemefuseError, ArithmeticError):
    """A computation produced non-finite values."""


class ContractError(MemefuseError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(MemefuseError, ValueError):
    """Invalid or inconsistent configuration values."""


class StateError(MemefuseError, RuntimeError):
    """A stateful object is in a condition that forbids the operation."""


class FormatError(MemefuseError, ValueError):
    """Base class for file parsing failures."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionError(FormatError):
    """File declares an unsupported format version."""


class TruncatedError(FormatError):
    """File ends before the declared payload is complete."""


class DimensionError(FormatError):
    """Declared dimensions are inconsistent with each other or the payload."""


class CheckpointError(FormatError):
    """Model checkpoint file is malformed or inconsistent."""
