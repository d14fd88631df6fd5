"""Layered, instanced data-visualization engine.

A visualization is declared as a stack of layers, each instancing one
primitive mesh per datum. The engine diffs successive scene declarations,
refills only the invalidated attribute buffers, renders headless or
on-screen targets through a device abstraction, and answers constant-time
pick queries from an index-colored offscreen pass.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    DomainError,
    GeometryError,
    LayerstackError,
    RangeError,
    ResourceError,
    SceneFileError,
    SpecError,
)
from .geomath import DoubleFloat, Viewport

__all__ = [
    "DoubleFloat",
    "Viewport",
    "LayerstackError",
    "RangeError",
    "DomainError",
    "GeometryError",
    "DegenerateInputError",
    "SpecError",
    "SceneFileError",
    "ResourceError",
    "__version__",
]
