"""Exception types shared across the engine."""


class LayerstackError(Exception):
    """Base class for all engine errors."""


class RangeError(LayerstackError, ValueError):
    """A numeric input is outside its representable or permitted range."""


class DomainError(LayerstackError, ValueError):
    """A coordinate is outside the valid projection domain."""


class GeometryError(LayerstackError, ValueError):
    """Invalid input geometry (self-intersecting rings, bad indices, ...)."""


class DegenerateInputError(GeometryError):
    """Geometric input with no usable extent (too few / collinear points)."""


class SpecError(LayerstackError, ValueError):
    """A scene or layer specification violates its schema or invariants."""


class SceneFileError(SpecError):
    """A scene JSON document failed validation; carries the offending path."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ResourceError(LayerstackError, RuntimeError):
    """Device-side resource failure (allocation, lost target)."""
