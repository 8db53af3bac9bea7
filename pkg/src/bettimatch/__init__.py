"""Spatially faithful barcode matching for 2D grayscale images.

Build filtered cubical complexes of images, compute their persistence
barcodes and the barcode of the map induced by including one filtration in
another, compose the induced matchings through a comparison image, and
derive a segmentation metric, a differentiable loss with exact per-pixel
gradient, and location-blind baselines for comparison.
"""

from .errors import (
    BettiMatchError,
    EmptyImage,
    IncompatibleGrids,
    IndexOutOfRange,
    MalformedFile,
    MismatchedInputs,
    NonFiniteValue,
    NotBinary,
    NotComparable,
    NotTwoDimensional,
    ShapeMismatch,
    TooLarge,
    UnsupportedFormat,
    WrongDimension,
)
from .grid import OUTSIDE, CellId, CubicalGrid, build_grid, validate_image
from .image_persistence import ImageBarcode, ImagePair, compute_image_barcode
from .matching import (
    BettiMatching,
    InducedMatching,
    LevelLoss,
    LossReport,
    TauError,
    betti_matching,
    betti_matching_error,
    betti_matching_loss,
    induced_matching,
)
from .metrics import (
    BettiError,
    Diagram,
    WassersteinMatching,
    accuracy,
    betti_number_error,
    dice,
    matching_precision,
    to_diagram,
    wasserstein_loss,
    wasserstein_matching,
)
from .oracle import (
    betti_flood_fill,
    reduce_boundary_matrix,
    reduce_image_matrix,
)
from .persistence import Barcode, Interval, betti_numbers_at, compute_barcode

__version__ = "0.1.0"

__all__ = [
    "BettiMatchError", "EmptyImage", "IncompatibleGrids", "IndexOutOfRange",
    "MalformedFile", "MismatchedInputs", "NonFiniteValue", "NotBinary",
    "NotComparable", "NotTwoDimensional", "ShapeMismatch", "TooLarge",
    "UnsupportedFormat", "WrongDimension",
    "OUTSIDE", "CellId", "CubicalGrid", "build_grid", "validate_image",
    "Barcode", "Interval", "betti_numbers_at", "compute_barcode",
    "ImageBarcode", "ImagePair", "compute_image_barcode",
    "BettiMatching", "InducedMatching", "LevelLoss", "LossReport", "TauError",
    "betti_matching", "betti_matching_error", "betti_matching_loss",
    "induced_matching",
    "BettiError", "Diagram", "WassersteinMatching", "accuracy",
    "betti_number_error", "dice", "matching_precision", "to_diagram",
    "wasserstein_loss", "wasserstein_matching",
    "betti_flood_fill", "reduce_boundary_matrix", "reduce_image_matrix",
    "__version__",
]
