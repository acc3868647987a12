"""Exception types shared across the library."""


class PreciseumError(Exception):
    """Base class for all library errors."""


class BitsRangeError(PreciseumError, ValueError):
    """An exact-bit count lies outside [0, mantissa_bits]."""


class ShapeError(PreciseumError, ValueError):
    """Array shapes are incompatible for the requested operation."""


class AxisError(PreciseumError, ValueError):
    """A reduction axis is out of range."""


class SerializationError(PreciseumError, ValueError):
    """A serialized array stream is malformed or truncated."""


class CapabilityError(PreciseumError, ValueError):
    """A program uses an operation the interval oracle cannot propagate."""
