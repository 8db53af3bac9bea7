"""Exception hierarchy shared by all modules."""


class BettiMatchError(Exception):
    """Base class for all errors raised by this package."""


class EmptyImage(BettiMatchError):
    """The image has zero pixels."""


class NonFiniteValue(BettiMatchError):
    """A pixel value is NaN or infinite."""


class NotTwoDimensional(BettiMatchError):
    """The input array is not a 2D matrix."""


class ShapeMismatch(BettiMatchError):
    """Two images that must share a shape do not."""


class WrongDimension(BettiMatchError):
    """A cell of the wrong dimension was passed to an operation."""


class IndexOutOfRange(BettiMatchError):
    """A refined cell index outside 0..n_cells-1."""


class NotBinary(BettiMatchError):
    """An operation restricted to {0,1} images received other values."""


class IncompatibleGrids(BettiMatchError):
    """Two grids differ in shape, construction, direction or padding."""


class NotComparable(BettiMatchError):
    """The entrywise domination required for image persistence fails."""


class MismatchedInputs(BettiMatchError):
    """Two results that must come from the same image pair do not."""


class TooLarge(BettiMatchError):
    """Input exceeds the size guard of a brute-force reference routine."""


class UnsupportedFormat(BettiMatchError):
    """Unknown or unsupported image file format."""


class MalformedFile(BettiMatchError):
    """A file that claims a supported format but cannot be parsed."""
