"""Primitive meshes, polygon triangulation and scattered-data interpolation."""

from .meshes import (
    Mesh,
    arrow_mesh,
    picking_cone_mesh,
    unit_cuboid_mesh,
    unit_disc_mesh,
)
from .earcut import PolygonRings, ear_clip_triangulate
from .delaunay import (
    PointLocator,
    Triangulation,
    delaunay_triangulate,
    interpolate_barycentric,
)

__all__ = [
    "Mesh",
    "unit_disc_mesh",
    "unit_cuboid_mesh",
    "arrow_mesh",
    "picking_cone_mesh",
    "PolygonRings",
    "ear_clip_triangulate",
    "Triangulation",
    "delaunay_triangulate",
    "interpolate_barycentric",
    "PointLocator",
]
