"""Primitive meshes the built-in layers instance.

All constructors return immutable :class:`Mesh` objects in model units;
layers scale and place them per instance in the vertex stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryError


@dataclass(frozen=True)
class Mesh:
    """Indexed triangle (or line) mesh.

    positions: (V, 3) float32, model units
    uvs: (V, 2) float32 or None
    indices: (T, 3) int32 vertex triples
    """

    positions: np.ndarray
    indices: np.ndarray
    uvs: np.ndarray | None = None
    topology: str = "triangles"

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float32)
        idx = np.ascontiguousarray(self.indices, dtype=np.int32)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise GeometryError("positions must be (V, 3)")
        if idx.ndim != 2 or idx.shape[1] != 3:
            raise GeometryError("indices must be (T, 3)")
        if idx.size and (idx.min() < 0 or idx.max() >= len(pos)):
            raise GeometryError("index out of vertex range")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "indices", idx)
        if self.uvs is not None:
            uv = np.ascontiguousarray(self.uvs, dtype=np.float32)
            if uv.shape != (len(pos), 2):
                raise GeometryError("uvs must be (V, 2)")
            object.__setattr__(self, "uvs", uv)
        pos.setflags(write=False)
        idx.setflags(write=False)

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    @property
    def triangle_count(self) -> int:
        return len(self.indices)

    def signed_volume(self) -> float:
        """Divergence-theorem volume; positive for outward-wound closed meshes."""
        v = self.positions.astype(np.float64)
        a = v[self.indices[:, 0]]
        b = v[self.indices[:, 1]]
        c = v[self.indices[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def unit_disc_mesh() -> Mesh:
    """Unit quad [-1, 1]^2 with uv == position.xy.

    The disc itself is cut in the fragment stage: fragments with
    |uv| > 1 are discarded by the disc program.
    """
    corners = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=np.float32)
    positions = np.concatenate([corners, np.zeros((4, 1), np.float32)], axis=1)
    return Mesh(positions=positions, uvs=corners,
                indices=np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32))


# Per-face brightness used by the flat shader so adjacent cuboid faces read
# as 3D. uv.x carries the factor, uv.y is unused.
_CUBOID_FACE_SHADE = {"+z": 1.0, "-z": 0.4, "+x": 0.8, "-x": 0.6, "+y": 0.55, "-y": 0.75}


def unit_cuboid_mesh() -> Mesh:
    """Axis-aligned unit cube [0, 1]^3, 24 vertices, 12 outward triangles."""
    faces = {
        "+x": [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
        "-x": [(0, 1, 0), (0, 0, 0), (0, 0, 1), (0, 1, 1)],
        "+y": [(1, 1, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)],
        "-y": [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
        "+z": [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
        "-z": [(0, 1, 0), (1, 1, 0), (1, 0, 0), (0, 0, 0)],
    }
    positions, uvs, indices = [], [], []
    for name, quad in faces.items():
        base = len(positions)
        positions.extend(quad)
        uvs.extend([(_CUBOID_FACE_SHADE[name], 0.0)] * 4)
        indices.append((base, base + 1, base + 2))
        indices.append((base, base + 2, base + 3))
    return Mesh(positions=np.array(positions, np.float32),
                uvs=np.array(uvs, np.float32),
                indices=np.array(indices, np.int32))


ARROW_TRIANGLE_COUNT = 16  # 10 shaft box + 2 head base + 4 head sides


def arrow_mesh() -> Mesh:
    """Unit-length arrow along +x: box shaft plus pyramidal head.

    Extent x in [0, 1], max half-width 0.25 at the head base; mirror
    symmetric about both the xz and xy planes. The shaft butts into the
    full head base quad, so the overlap strip is hidden inside the head.
    """
    sw = 0.08   # shaft half-width
    hx = 0.62   # head base plane
    hw = 0.25   # head half-width

    positions = []
    indices = []

    def quad(a, b, c, d):
        base = len(positions)
        positions.extend([a, b, c, d])
        indices.append((base, base + 1, base + 2))
        indices.append((base, base + 2, base + 3))

    def tri(a, b, c):
        base = len(positions)
        positions.extend([a, b, c])
        indices.append((base, base + 1, base + 2))

    quad((0, -sw, -sw), (hx, -sw, -sw), (hx, -sw, sw), (0, -sw, sw))      # shaft -y
    quad((hx, sw, -sw), (0, sw, -sw), (0, sw, sw), (hx, sw, sw))          # shaft +y
    quad((0, sw, -sw), (hx, sw, -sw), (hx, -sw, -sw), (0, -sw, -sw))      # shaft -z
    quad((0, -sw, sw), (hx, -sw, sw), (hx, sw, sw), (0, sw, sw))          # shaft +z
    quad((0, sw, -sw), (0, -sw, -sw), (0, -sw, sw), (0, sw, sw))          # tail cap
    quad((hx, -hw, -hw), (hx, hw, -hw), (hx, hw, hw), (hx, -hw, hw))      # head base
    tip = (1.0, 0.0, 0.0)
    tri((hx, hw, -hw), (hx, -hw, -hw), tip)   # head -z side
    tri((hx, -hw, -hw), (hx, -hw, hw), tip)   # head -y side
    tri((hx, -hw, hw), (hx, hw, hw), tip)     # head +z side
    tri((hx, hw, hw), (hx, hw, -hw), tip)     # head +y side
    mesh = Mesh(positions=np.array(positions, np.float32),
                indices=np.array(indices, np.int32))
    assert mesh.triangle_count == ARROW_TRIANGLE_COUNT
    return mesh


def picking_cone_mesh(segments: int = 32) -> Mesh:
    """Cone with apex depth 0 at the origin and base ring depth 1 at radius 1.

    Depth grows linearly with radius, so depth-testing overlapping cones
    keeps, at every pixel, the cone whose center is nearest: a Voronoi
    partition at pixel resolution.
    """
    if segments < 8:
        raise GeometryError("picking cone needs >= 8 segments")
    theta = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.column_stack([np.cos(theta), np.sin(theta), np.ones(segments)])
    positions = np.vstack([[0.0, 0.0, 0.0], ring]).astype(np.float32)
    nxt = (np.arange(segments) + 1) % segments
    indices = np.column_stack([
        np.zeros(segments, np.int32),
        1 + np.arange(segments, dtype=np.int32),
        1 + nxt.astype(np.int32),
    ])
    return Mesh(positions=positions, indices=indices)
