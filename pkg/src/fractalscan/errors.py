"""Exception types raised by the library.

Everything derives from FractalScanError, which itself subclasses
ValueError so callers that only know stdlib exceptions still behave
sensibly.
"""


class FractalScanError(ValueError):
    """Base class for all library-specific errors."""


class InvalidDirection(FractalScanError):
    """Curve direction outside {1, 2, 3, 4}, or a directional variant was
    requested for a curve kind that has none."""


class DepthTooLarge(FractalScanError):
    """Recursion depth above the memory guard."""


class ShapeNotSupported(FractalScanError):
    """Grid shape the requested curve kind cannot cover directly."""


class OffsetTooLarge(FractalScanError):
    """Vertical shift offset with magnitude >= the row count."""


class EnclosingGridMismatch(FractalScanError):
    """Order does not cover the smallest enclosing power-of-two square of
    the target shape."""


class NotBlockContiguous(FractalScanError):
    """A 2x2 cell block does not occupy four consecutive sequence
    positions, so the order has no self-similar reduction."""


class NonPositiveDelta(FractalScanError):
    """Timescale value that is zero or negative."""


class DimensionMismatch(FractalScanError):
    """Array arguments whose dimensions are inconsistent."""


class ShapeMismatch(FractalScanError):
    """Grid or order shapes that were required to agree but do not."""


class LengthMismatch(FractalScanError):
    """Sequence length inconsistent with the order or grid it is paired
    with."""
