"""Extended-precision coordinate math from paired 32-bit floats.

A real number is carried as a non-overlapping (hi, lo) pair of float32
values, giving ~48 significant bits while every arithmetic step stays
expressible in 32-bit operations (the precision a GPU shader offers).
The module also owns the Web Mercator common space (512 world units per
globe at zoom 0, y growing southward) and the geospatial camera.

All pair-arithmetic helpers are elementwise: they accept float32 scalars
or numpy arrays of equal shape. Everything here is a pure function; no
shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError, SpecError

WORLD_SIZE = 512.0
MAX_LATITUDE = 85.051129  # open band; outside is an error, never a clamp
MAX_PITCH = 60.0

_F32 = np.float32
_SPLIT_MAGNITUDE_MIN = 2.0 ** -60
_SPLIT_MAGNITUDE_MAX = 2.0 ** 60
_DEKKER_SPLITTER = _F32(4097.0)  # 2**12 + 1 for a 24-bit significand


# ---------------------------------------------------------------------------
# float32 building blocks
# ---------------------------------------------------------------------------

def two_sum(a, b):
    """Error-free sum of two float32 values: s + e == a + b exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    """Error-free sum assuming |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def two_prod(a, b):
    """Error-free product of two float32 values: p + e == a * b exactly.

    Uses a widened multiply for the residual (the product of two 24-bit
    significands is exact in float64), standing in for a hardware fused
    multiply-add. ``two_prod_dekker`` is the pure-32-bit fallback.
    """
    p = a * b
    e = _F32(np.float64(a) * np.float64(b) - np.float64(p))
    return p, e


def two_prod_dekker(a, b):
    """Error-free product via Dekker splitting, entirely in float32."""
    p = a * b
    ca = _DEKKER_SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _DEKKER_SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


# ---------------------------------------------------------------------------
# (hi, lo) pair arithmetic
# ---------------------------------------------------------------------------

def split_double(x):
    """Split 64-bit reals into non-overlapping (hi, lo) float32 pairs.

    Accepts a scalar or array. Magnitudes must be 0 or within
    [2**-60, 2**60] so neither component overflows or loses its tail.
    """
    x = np.asarray(x, dtype=np.float64)
    mag = np.abs(x)
    bad = ~np.isfinite(x) | ((mag != 0.0) & ((mag < _SPLIT_MAGNITUDE_MIN) | (mag > _SPLIT_MAGNITUDE_MAX)))
    if np.any(bad):
        raise RangeError("magnitude outside {0} U [2**-60, 2**60]")
    hi = x.astype(_F32)
    lo = (x - hi.astype(np.float64)).astype(_F32)
    if x.ndim == 0:
        return _F32(hi[()]), _F32(lo[()])
    return hi, lo


def pair_add(a_hi, a_lo, b_hi, b_lo):
    """Add two (hi, lo) pairs; relative error <= 3 * 2**-48 of the exact sum.

    Overflow saturates to inf in hi; check :func:`pair_is_valid`.
    """
    s_hi, s_lo = two_sum(a_hi, b_hi)
    t_hi, t_lo = two_sum(a_lo, b_lo)
    c = s_lo + t_hi
    v_hi, v_lo = quick_two_sum(s_hi, c)
    w = t_lo + v_lo
    return quick_two_sum(v_hi, w)


def pair_neg(a_hi, a_lo):
    return -a_hi, -a_lo


def pair_sub(a_hi, a_lo, b_hi, b_lo):
    return pair_add(a_hi, a_lo, -b_hi, -b_lo)


def pair_mul(a_hi, a_lo, b_hi, b_lo, product=two_prod):
    """Multiply two (hi, lo) pairs; relative error <= 5 * 2**-48."""
    p_hi, p_lo = product(a_hi, b_hi)
    t = a_lo * b_lo
    t = a_hi * b_lo + t
    t = a_lo * b_hi + t
    p_lo = p_lo + t
    return quick_two_sum(p_hi, p_lo)


def pair_to_double(hi, lo):
    """Recombine a pair into the float64 it represents (exact)."""
    return np.asarray(hi, dtype=np.float64) + np.asarray(lo, dtype=np.float64)


def pair_is_valid(hi, lo):
    """False where an operation overflowed (hi saturated to +-inf or NaN)."""
    return np.isfinite(hi) & np.isfinite(lo)


def pair_is_normalized(hi, lo):
    """Check the non-overlap invariant: hi == float32(hi + lo)."""
    wide = np.asarray(hi, dtype=np.float64) + np.asarray(lo, dtype=np.float64)
    return np.all(wide.astype(_F32) == np.asarray(hi, dtype=_F32))


@dataclass(frozen=True)
class DoubleFloat:
    """Scalar (hi, lo) pair; ``hi`` carries the leading 24 bits."""

    hi: float
    lo: float

    @classmethod
    def from_double(cls, x: float) -> "DoubleFloat":
        hi, lo = split_double(x)
        return cls(float(hi), float(lo))

    def to_double(self) -> float:
        return float(self.hi) + float(self.lo)

    @property
    def valid(self) -> bool:
        return math.isfinite(self.hi) and math.isfinite(self.lo)

    def __add__(self, other: "DoubleFloat") -> "DoubleFloat":
        h, l = pair_add(_F32(self.hi), _F32(self.lo), _F32(other.hi), _F32(other.lo))
        return DoubleFloat(float(h), float(l))

    def __neg__(self) -> "DoubleFloat":
        return DoubleFloat(-self.hi, -self.lo)

    def __sub__(self, other: "DoubleFloat") -> "DoubleFloat":
        return self + (-other)

    def __mul__(self, other: "DoubleFloat") -> "DoubleFloat":
        h, l = pair_mul(_F32(self.hi), _F32(self.lo), _F32(other.hi), _F32(other.lo))
        return DoubleFloat(float(h), float(l))


# ---------------------------------------------------------------------------
# Web Mercator common space
# ---------------------------------------------------------------------------

def _check_lng_lat(lng, lat):
    lng = np.asarray(lng, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    if not (np.all(np.isfinite(lng)) and np.all(np.isfinite(lat))):
        raise DomainError("longitude/latitude must be finite")
    if np.any(np.abs(lng) > 180.0):
        raise DomainError("longitude outside [-180, 180]")
    if np.any(np.abs(lat) >= MAX_LATITUDE):
        raise DomainError(f"latitude outside the open band (-{MAX_LATITUDE}, {MAX_LATITUDE})")
    return lng, lat


def lng_lat_to_world(lng, lat):
    """Project degrees to Web Mercator world units (x east, y south).

    The atanh(sin(lat)) form of the Mercator ordinate keeps the equator at
    y == 256 exactly.
    """
    lng, lat = _check_lng_lat(lng, lat)
    x = WORLD_SIZE * (0.5 + lng / 360.0)
    y = WORLD_SIZE * (0.5 - np.arctanh(np.sin(np.radians(lat))) / (2.0 * np.pi))
    # Guard against sub-ulp excursions at the very edge of the latitude band.
    y = np.clip(y, 0.0, WORLD_SIZE)
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def world_to_lng_lat(x, y):
    """Exact analytic inverse of :func:`lng_lat_to_world`."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any((x < 0.0) | (x > WORLD_SIZE) | (y < 0.0) | (y > WORLD_SIZE)):
        raise DomainError("world point outside [0, 512]^2")
    lng = 360.0 * (x / WORLD_SIZE - 0.5)
    lat = np.degrees(2.0 * np.arctan(np.exp((0.5 - y / WORLD_SIZE) * 2.0 * np.pi)) - np.pi / 2.0)
    if x.ndim == 0:
        return float(lng), float(lat)
    return lng, lat


# ---------------------------------------------------------------------------
# Viewport and camera
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Viewport:
    """Geospatial camera: center, zoom, pitch, bearing and pixel size.

    Bearing is normalized into [0, 360); all other fields are validated,
    not adjusted.
    """

    longitude: float
    latitude: float
    zoom: float
    width: int
    height: int
    pitch: float = 0.0
    bearing: float = 0.0

    def __post_init__(self):
        vals = (self.longitude, self.latitude, self.zoom, self.pitch, self.bearing)
        if not all(math.isfinite(v) for v in vals):
            raise SpecError("viewport fields must be finite")
        _check_lng_lat(self.longitude, self.latitude)
        if self.zoom < 0.0:
            raise SpecError("zoom must be >= 0")
        if not 0.0 <= self.pitch <= MAX_PITCH:
            raise SpecError(f"pitch must be within [0, {MAX_PITCH}]")
        if self.width <= 0 or self.height <= 0:
            raise SpecError("viewport width and height must be positive")
        object.__setattr__(self, "bearing", self.bearing % 360.0)

    @property
    def scale(self) -> float:
        return 2.0 ** self.zoom

    @property
    def center_world(self) -> tuple[float, float]:
        return lng_lat_to_world(self.longitude, self.latitude)

    @property
    def altitude(self) -> float:
        # camera height above the map plane, in pixels
        return 1.5 * self.height


FIELD_OF_VIEW = 2.0 * math.atan(1.0 / 3.0)


def perspective_matrix(fovy: float, aspect: float, near: float, far: float) -> np.ndarray:
    f = 1.0 / math.tan(fovy / 2.0)
    m = np.zeros((4, 4), dtype=np.float64)
    m[0, 0] = f / aspect
    m[1, 1] = f
    m[2, 2] = (far + near) / (near - far)
    m[2, 3] = 2.0 * far * near / (near - far)
    m[3, 2] = -1.0
    return m


def _map_to_camera_axes(bearing_deg: float, pitch_deg: float) -> np.ndarray:
    """3x3 mapping from (east, south, up) map offsets to camera axes."""
    b = math.radians(bearing_deg)
    p = math.radians(pitch_deg)
    rot_bearing = np.array([
        [math.cos(b), -math.sin(b), 0.0],
        [math.sin(b), math.cos(b), 0.0],
        [0.0, 0.0, 1.0],
    ])
    flip_y = np.diag([1.0, -1.0, 1.0])  # screen-up is north
    tilt = np.array([
        [1.0, 0.0, 0.0],
        [0.0, math.cos(p), math.sin(p)],
        [0.0, -math.sin(p), math.cos(p)],
    ])
    return tilt @ flip_y @ rot_bearing


def view_projection(viewport: Viewport) -> np.ndarray:
    """4x4 matrix taking (x_world, y_world, elevation_world, 1) to clip space."""
    cx, cy = viewport.center_world
    s = viewport.scale
    vp = view_projection_relative(viewport)
    recenter = np.eye(4)
    recenter[0, 3] = -cx
    recenter[1, 3] = -cy
    return vp @ recenter


def view_projection_relative(viewport: Viewport) -> np.ndarray:
    """Like :func:`view_projection` but for offsets from the projected center.

    This is the matrix the render pass uses: positions are made
    camera-center-relative before narrowing to 32-bit, which bounds their
    magnitude and halves the precision demand.
    """
    alt = viewport.altitude
    proj = perspective_matrix(FIELD_OF_VIEW, viewport.width / viewport.height,
                              0.15 * viewport.height, 15.0 * viewport.height)
    view = np.eye(4)
    view[:3, :3] = _map_to_camera_axes(viewport.bearing, viewport.pitch)
    view[2, 3] = -alt
    scale = np.diag([viewport.scale, viewport.scale, viewport.scale, 1.0])
    return proj @ view @ scale


def as_column_major(m: np.ndarray) -> np.ndarray:
    """Flatten a 4x4 matrix to the 16-value column-major layout."""
    return np.asarray(m, dtype=np.float64).flatten(order="F")


def clip_to_screen(clip: np.ndarray, width: float, height: float):
    """Perspective divide + viewport transform. clip has shape (..., 4)."""
    w = clip[..., 3]
    visible = w > 0.0
    w_safe = np.where(visible, w, 1.0)
    ndc = clip[..., :3] / w_safe[..., None]
    x = (ndc[..., 0] + 1.0) * 0.5 * width
    y = (1.0 - ndc[..., 1]) * 0.5 * height
    return x, y, ndc[..., 2], visible


def project_to_screen(viewport: Viewport, lng, lat, elevation=0.0):
    """Full 64-bit reference pipeline: degrees to pixels (x right, y down).

    Returns (x, y, visible); ``visible`` is False for points behind the
    camera (possible at high pitch).
    """
    wx, wy = lng_lat_to_world(lng, lat)
    wx = np.asarray(wx, dtype=np.float64)
    wy = np.asarray(wy, dtype=np.float64)
    elev = np.broadcast_to(np.asarray(elevation, dtype=np.float64), wx.shape)
    pts = np.stack([wx, wy, elev, np.ones_like(wx)], axis=-1)
    clip = pts @ view_projection(viewport).T
    x, y, _, visible = clip_to_screen(clip, viewport.width, viewport.height)
    if x.ndim == 0:
        return float(x), float(y), bool(visible)
    return x, y, visible


def project_emulated(viewport: Viewport, lng, lat, precision: str = "df64"):
    """Project through an emulated 32-bit vertex stage.

    ``precision="df64"`` carries world coordinates as (hi, lo) pairs and
    subtracts the camera center in pair arithmetic before narrowing;
    ``precision="f32"`` narrows world coordinates to single float32 values
    first, which exhibits the coordinate-quantization wobble at high zoom.
    Returns (x, y) pixel arrays (float64 copies of float32 results).
    """
    if precision not in ("df64", "f32"):
        raise SpecError(f"unknown precision mode {precision!r}")
    wx, wy = lng_lat_to_world(lng, lat)
    cx, cy = viewport.center_world
    if precision == "df64":
        xh, xl = split_double(wx)
        yh, yl = split_double(wy)
        cxh, cxl = split_double(cx)
        cyh, cyl = split_double(cy)
        rel_x = pair_sub(xh, xl, cxh, cxl)[0]
        rel_y = pair_sub(yh, yl, cyh, cyl)[0]
    else:
        rel_x = np.asarray(wx, dtype=_F32) - _F32(cx)
        rel_y = np.asarray(wy, dtype=_F32) - _F32(cy)
    m = view_projection_relative(viewport).astype(_F32)
    rel_x = np.atleast_1d(rel_x)
    rel_y = np.atleast_1d(rel_y)
    pts = np.stack([rel_x, rel_y, np.zeros_like(rel_x), np.ones_like(rel_x)], axis=-1)
    clip = pts @ m.T  # float32 matmul, as a shader would evaluate it
    x, y, _, _ = clip_to_screen(clip, _F32(viewport.width), _F32(viewport.height))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.isscalar(lng) or np.asarray(lng).ndim == 0:
        return float(x[0]), float(y[0])
    return x, y
