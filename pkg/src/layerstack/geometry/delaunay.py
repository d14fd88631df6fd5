"""Incremental Delaunay triangulation and barycentric field interpolation.

Bowyer-Watson construction with a super-triangle. Incircle tests are
evaluated with extended-precision accumulation (long double) and a
relative tolerance of 1e-12; points on a circumcircle within tolerance
are treated as outside the cavity, which breaks cocircular ties
deterministically in favor of the earliest-inserted diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInputError, GeometryError

INCIRCLE_RTOL = 1e-12
_LD = np.longdouble


@dataclass(frozen=True)
class Triangulation:
    """Immutable 2D triangulation: points plus CCW index triples.

    ``source_index`` maps original input rows to rows of ``points`` when
    the constructor deduplicated input (Delaunay); identity otherwise.
    """

    points: np.ndarray
    triangles: np.ndarray
    warnings: tuple[str, ...] = ()
    source_index: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        tris = np.ascontiguousarray(self.triangles, dtype=np.int32)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeometryError("points must be (N, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise GeometryError("triangles must be (T, 3)")
        if tris.size:
            if tris.min() < 0 or tris.max() >= len(pts):
                raise GeometryError("triangle index out of range")
            a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
            cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
            flip = cross < 0
            if np.any(flip):
                tris = tris.copy()
                tris[flip] = tris[flip][:, [0, 2, 1]]
            key = np.sort(tris, axis=1)
            if len(np.unique(key, axis=0)) != len(tris):
                raise GeometryError("duplicate triangles")
        pts.setflags(write=False)
        tris.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "triangles", tris)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)


def circumcircle(a, b, c):
    """Circumcenter and squared radius, accumulated in long double.

    Returns (cx, cy, r2) as long doubles; raises for collinear input.
    """
    ax, ay = _LD(a[0]), _LD(a[1])
    bx, by = _LD(b[0]), _LD(b[1])
    cx, cy = _LD(c[0]), _LD(c[1])
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise GeometryError("collinear triangle has no circumcircle")
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r2 = (ax - ux) ** 2 + (ay - uy) ** 2
    return ux, uy, r2


def _dedupe_in_order(pts):
    """Unique rows in first-occurrence order + inverse map for every input row."""
    seen: dict[tuple, int] = {}
    order = []
    inverse = np.empty(len(pts), dtype=np.int64)
    for i, p in enumerate(map(tuple, pts)):
        j = seen.get(p)
        if j is None:
            j = len(order)
            seen[p] = j
            order.append(i)
        inverse[i] = j
    return pts[order], inverse


def delaunay_triangulate(points) -> Triangulation:
    """Delaunay triangulation of 2D points (Bowyer-Watson, incremental).

    Duplicate points are removed; ``source_index`` reports the mapping.
    Fewer than 3 distinct points, or all collinear, raise
    :class:`DegenerateInputError`.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError("points must be (N, 2)")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("points must be finite")
    pts, inverse = _dedupe_in_order(pts)
    n = len(pts)
    if n < 3:
        raise DegenerateInputError("need at least 3 distinct points")

    span = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 1e-30)
    a = pts[0]
    rel = pts - a
    cross = np.abs(rel[:, 0, None] * rel[None, :, 1] - rel[:, 1, None] * rel[None, :, 0])
    if cross.max() <= 1e-12 * span * span:
        raise DegenerateInputError("all points are collinear")

    center = pts.mean(axis=0)
    radius = float(np.max(np.hypot(*(pts - center).T))) + span
    big = 64.0 * radius
    angles = np.pi / 2 + np.array([0.0, 2.0, 4.0]) * np.pi / 3.0
    super_pts = center + big * np.column_stack([np.cos(angles), np.sin(angles)])
    verts = np.vstack([pts, super_pts])

    tris: list[tuple[int, int, int]] = [(n, n + 1, n + 2)]
    circ: list[tuple] = [circumcircle(*verts[list(tris[0])])]

    def tri_ccw(i, j, k):
        pa, pb, pc = verts[i], verts[j], verts[k]
        s = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        return (i, j, k) if s >= 0 else (i, k, j)

    for pi in range(n):
        px, py = _LD(verts[pi][0]), _LD(verts[pi][1])
        cc = np.array(circ, dtype=np.longdouble)
        d2 = (cc[:, 0] - px) ** 2 + (cc[:, 1] - py) ** 2
        bad = set(np.nonzero(d2 < cc[:, 2] * (1.0 - INCIRCLE_RTOL))[0].tolist())
        if not bad:
            bad = {int(np.argmin(d2 - cc[:, 2]))}

        while True:
            edge_count: dict[tuple[int, int], int] = {}
            edge_dir: dict[tuple[int, int], tuple[int, int]] = {}
            for t in bad:
                i, j, k = tris[t]
                for u, v in ((i, j), (j, k), (k, i)):
                    key = (u, v) if u < v else (v, u)
                    edge_count[key] = edge_count.get(key, 0) + 1
                    edge_dir[key] = (u, v)
            boundary = [edge_dir[k] for k, cnt in edge_count.items() if cnt == 1]
            # a cavity edge collinear with the new point would produce a
            # zero-area fan triangle; absorb its outer neighbor instead
            grown = False
            for (u, v) in boundary:
                pu, pv = verts[u], verts[v]
                cr = (pv[0] - pu[0]) * (verts[pi][1] - pu[1]) - (pv[1] - pu[1]) * (verts[pi][0] - pu[0])
                scale = max(abs(pv[0] - pu[0]), abs(pv[1] - pu[1]), 1.0)
                if abs(cr) <= 1e-14 * scale * scale:
                    key = (u, v) if u < v else (v, u)
                    for t, tri in enumerate(tris):
                        if t in bad:
                            continue
                        es = tri, (tri[1], tri[2], tri[0]), (tri[2], tri[0], tri[1])
                        if any((min(e[0], e[1]), max(e[0], e[1])) == key for e in es):
                            bad.add(t)
                            grown = True
                            break
                    if grown:
                        break
            if not grown:
                break

        keep = [t for t in range(len(tris)) if t not in bad]
        tris = [tris[t] for t in keep]
        circ = [circ[t] for t in keep]
        for (u, v) in boundary:
            t = tri_ccw(pi, u, v)
            tris.append(t)
            circ.append(circumcircle(*verts[list(t)]))

    final = [t for t in tris if max(t) < n]
    canon = []
    for (i, j, k) in final:
        m = min(i, j, k)
        if i == m:
            canon.append((i, j, k))
        elif j == m:
            canon.append((j, k, i))
        else:
            canon.append((k, i, j))
    canon.sort()
    return Triangulation(points=pts, triangles=np.array(canon, np.int32),
                         source_index=inverse)


def _barycentric(tri_pts, q):
    a, b, c = tri_pts
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if det == 0:
        return None
    l1 = ((b[0] - q[0]) * (c[1] - q[1]) - (b[1] - q[1]) * (c[0] - q[0])) / det
    l2 = ((c[0] - q[0]) * (a[1] - q[1]) - (c[1] - q[1]) * (a[0] - q[0])) / det
    return np.array([l1, l2, 1.0 - l1 - l2])


class PointLocator:
    """Walking point location over a triangulation.

    Remembers the last hit, so sweeping queries along a grid touch only a
    few triangles each. Not safe for concurrent use; make one per thread.
    """

    def __init__(self, tri: Triangulation):
        self.tri = tri
        self._last = 0
        self._neighbor: dict[tuple[int, int], list[int]] = {}
        for t, (i, j, k) in enumerate(tri.triangles):
            for u, v in ((i, j), (j, k), (k, i)):
                key = (u, v) if u < v else (v, u)
                self._neighbor.setdefault(key, []).append(t)
        self._eps = 1e-12 * max(1.0, float(np.abs(tri.points).max()))

    def _step(self, t: int, q) -> tuple[int, np.ndarray | None]:
        idx = self.tri.triangles[t]
        w = _barycentric(self.tri.points[idx], q)
        if w is None:
            return -1, None
        if np.all(w >= -1e-12):
            return t, w
        worst = int(np.argmin(w))
        # weight i belongs to vertex i; the exit edge is the opposite one
        edge = [idx[(worst + 1) % 3], idx[(worst + 2) % 3]]
        key = (min(edge), max(edge))
        tris = self._neighbor.get(key, [])
        nxt = [o for o in tris if o != t]
        return (nxt[0], None) if nxt else (-1, None)

    def locate(self, q) -> tuple[int, np.ndarray | None]:
        """Return (triangle index, barycentric weights) or (-1, None)."""
        q = np.asarray(q, dtype=np.float64)
        if self.tri.triangle_count == 0:
            return -1, None
        t = self._last
        seen = set()
        while t >= 0 and t not in seen:
            seen.add(t)
            t2, w = self._step(t, q)
            if w is not None:
                self._last = t
                return t, w
            t = t2
        # walk escaped or cycled: brute scan
        for t in range(self.tri.triangle_count):
            w = _barycentric(self.tri.points[self.tri.triangles[t]], q)
            if w is not None and np.all(w >= -1e-12):
                self._last = t
                return t, w
        return -1, None


def interpolate_barycentric(tri: Triangulation, values, q, locator: PointLocator | None = None):
    """Barycentric interpolation of per-point values at q.

    Returns the interpolated k-vector, or None when q is outside the hull.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) != len(tri.points):
        raise GeometryError("values length must equal point count")
    loc = locator if locator is not None else PointLocator(tri)
    t, w = loc.locate(q)
    if t < 0:
        return None
    idx = tri.triangles[t]
    return w @ values[idx]
