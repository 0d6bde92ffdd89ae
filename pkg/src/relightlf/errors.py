"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid geometric input (bad pixel, malformed camera, ...)."""


class DegenerateRayError(GeometryError):
    """Ray is (numerically) parallel to the parameterization planes."""


class OutOfBoundsError(GeometryError):
    """Ray intersections fall outside the normalization bounds."""


class ShapeError(ValueError):
    """Array shape does not match the declared layer / batch layout."""


class TrainingError(RuntimeError):
    """Non-finite loss or gradient encountered during optimization."""


class CalibrationError(RuntimeError):
    """Light-direction calibration could not find a usable highlight."""


class ManifestError(ValueError):
    """Dataset manifest is malformed or internally inconsistent."""
