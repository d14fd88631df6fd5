"""Ear-clipping triangulation of polygons with holes.

Holes are joined to the outer ring by a bridge from each hole's
maximum-x vertex to the nearest visible outer vertex, then the merged
ring is clipped ear by ear. O(n^2) checks throughout: inputs are
desk-scale polygon features, not meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError
from .delaunay import Triangulation

_EPS = 1e-12


def _close_strip(ring):
    ring = np.asarray(ring, dtype=np.float64)
    if ring.ndim != 2 or ring.shape[1] != 2 or len(ring) < 3:
        raise GeometryError("ring must be an (N>=3, 2) array")
    if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(ring) < 3:
        raise GeometryError("ring has fewer than 3 distinct vertices")
    return ring


def _signed_area(ring) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) / 2.0)


def _segments_properly_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        scale = max(abs(b[0] - a[0]), abs(b[1] - a[1]), abs(c[0] - a[0]), abs(c[1] - a[1]), 1.0)
        if abs(v) <= _EPS * scale * scale:
            return 0
        return 1 if v > 0 else -1

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _ring_self_intersects(ring) -> bool:
    n = len(ring)
    for i in range(n):
        a1, a2 = ring[i], ring[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent segments share an endpoint
            if _segments_properly_intersect(a1, a2, ring[j], ring[(j + 1) % n]):
                return True
    return False


def _point_in_ring(pt, ring) -> bool:
    # even-odd rule, half-open edges
    x, y = pt
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xi:
                inside = not inside
    return inside


@dataclass(frozen=True)
class PolygonRings:
    """One outer ring (normalized CCW) plus hole rings (normalized CW).

    Rings may be passed open or closed; orientation is normalized.
    Self-intersecting rings and holes outside the outer ring are rejected.
    Zero-area (collinear) rings are kept and yield an empty triangulation
    with a warning downstream.
    """

    outer: np.ndarray
    holes: tuple[np.ndarray, ...] = ()

    def __init__(self, outer, holes=()):
        outer = _close_strip(outer)
        if _ring_self_intersects(outer):
            raise GeometryError("outer ring is self-intersecting")
        if _signed_area(outer) < 0:
            outer = outer[::-1].copy()
        norm_holes = []
        for h in holes:
            h = _close_strip(h)
            if _ring_self_intersects(h):
                raise GeometryError("hole ring is self-intersecting")
            if _signed_area(h) > 0:
                h = h[::-1].copy()
            if abs(_signed_area(outer)) > 0 and not _point_in_ring(h[0], outer):
                raise GeometryError("hole lies outside the outer ring")
            norm_holes.append(h)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", tuple(norm_holes))

    def area(self) -> float:
        return abs(_signed_area(self.outer)) - sum(abs(_signed_area(h)) for h in self.holes)


def _triangle_contains(ax, ay, bx, by, cx, cy, px, py) -> bool:
    # strict interior test
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    return (d1 > _EPS and d2 > _EPS and d3 > _EPS)


def _bridge_holes(points: np.ndarray, outer_ids: list[int], hole_rings: list[list[int]]) -> list[int]:
    """Splice every hole into the outer ring; returns the merged index ring."""
    merged = list(outer_ids)
    pending = sorted(hole_rings, key=lambda h: -max(points[i, 0] for i in h))
    for pos, hole in enumerate(pending):
        j = max(range(len(hole)), key=lambda k: (points[hole[k], 0], -k))
        hp = points[hole[j]]
        obstacles = [merged] + pending[pos + 1:] + [hole]
        best = None
        for i, vid in enumerate(merged):
            vp = points[vid]
            if np.array_equal(vp, hp):
                continue
            blocked = False
            for ring in obstacles:
                n = len(ring)
                for k in range(n):
                    a, b = points[ring[k]], points[ring[(k + 1) % n]]
                    if (np.array_equal(a, hp) or np.array_equal(b, hp)
                            or np.array_equal(a, vp) or np.array_equal(b, vp)):
                        continue
                    if _segments_properly_intersect(hp, vp, a, b):
                        blocked = True
                        break
                if blocked:
                    break
            if blocked:
                continue
            d = float(np.hypot(*(vp - hp)))
            if best is None or d < best[0] - _EPS or (abs(d - best[0]) <= _EPS and vid < best[2]):
                best = (d, i, vid)
        if best is None:
            raise GeometryError("no visible bridge vertex for hole")
        i = best[1]
        merged = (merged[:i + 1] + hole[j:] + hole[:j]
                  + [hole[j], merged[i]] + merged[i + 1:])
    return merged


def ear_clip_triangulate(rings: PolygonRings) -> Triangulation:
    """Triangulate a polygon-with-holes; triangle areas tile the ring area.

    Degenerate (zero-area) input yields an empty triangulation carrying a
    warning instead of raising.
    """
    outer = rings.outer
    if abs(_signed_area(outer)) <= _EPS * max(1.0, float(np.abs(outer).max()) ** 2):
        pts = np.vstack([outer] + list(rings.holes)) if rings.holes else outer
        return Triangulation(points=pts, triangles=np.empty((0, 3), np.int32),
                             warnings=("degenerate polygon: collinear ring",))

    points = np.vstack([outer] + list(rings.holes))
    outer_ids = list(range(len(outer)))
    hole_rings = []
    base = len(outer)
    for h in rings.holes:
        hole_rings.append(list(range(base, base + len(h))))
        base += len(h)

    ring = _bridge_holes(points, outer_ids, hole_rings)
    triangles = []
    guard = 0
    while len(ring) > 3:
        n = len(ring)
        clipped = False
        for i in range(n):
            ia, ib, ic = ring[(i - 1) % n], ring[i], ring[(i + 1) % n]
            ax, ay = points[ia]
            bx, by = points[ib]
            cx, cy = points[ic]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross <= _EPS:
                continue
            corners = (points[ia], points[ib], points[ic])
            ear = True
            for vid in ring:
                if vid in (ia, ib, ic):
                    continue
                p = points[vid]
                if any(np.array_equal(p, c) for c in corners):
                    continue  # bridge duplicates sit exactly on a corner
                if _triangle_contains(ax, ay, bx, by, cx, cy, p[0], p[1]):
                    ear = False
                    break
            if ear:
                triangles.append((ia, ib, ic))
                ring.pop(i)
                clipped = True
                break
        if not clipped:
            # drop a collinear vertex and retry; genuinely stuck input is invalid
            for i in range(n):
                ia, ib, ic = ring[(i - 1) % n], ring[i], ring[(i + 1) % n]
                ax, ay = points[ia]
                bx, by = points[ib]
                cx, cy = points[ic]
                if abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) <= _EPS:
                    ring.pop(i)
                    clipped = True
                    break
            if not clipped:
                raise GeometryError("ear clipping failed; polygon is not simple")
        guard += 1
        if guard > 10 * (len(points) + 2) ** 2:
            raise GeometryError("ear clipping did not terminate")
    if len(ring) == 3:
        ia, ib, ic = ring
        ax, ay = points[ia]
        bx, by = points[ib]
        cx, cy = points[ic]
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) > _EPS:
            triangles.append((ia, ib, ic))

    return Triangulation(points=points, triangles=np.array(triangles, np.int32))
