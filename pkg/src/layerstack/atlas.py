"""Icon and glyph atlas assets.

An icon atlas is one RGBA image cut into cells, either as a uniform
rows x cols grid or with explicit per-icon rects. A glyph atlas adds a
metrics sidecar (JSON) mapping each character to its rect and advance
width; text layers need no font rasterizer at runtime. Sidecar format::

    {"image": "glyphs.png", "line_height": 14,
     "glyphs": {"A": {"rect": [x, y, w, h], "advance": 8}, ...}}

ASCII 32..126 coverage is required of shipped atlases; missing glyphs
substitute '?' and are tallied by the label layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import SpecError


def load_image_rgba(path) -> np.ndarray:
    img = Image.open(path).convert("RGBA")
    return np.asarray(img, dtype=np.uint8).copy()


@dataclass(frozen=True)
class IconAtlas:
    image: np.ndarray                     # (H, W, 4) uint8
    rects: tuple[tuple[int, int, int, int], ...]  # pixel (x, y, w, h), origin top-left

    @classmethod
    def from_grid(cls, image, rows: int, cols: int) -> "IconAtlas":
        h, w = image.shape[:2]
        cw, ch = w // cols, h // rows
        rects = tuple((c * cw, r * ch, cw, ch) for r in range(rows) for c in range(cols))
        return cls(image=image, rects=rects)

    @property
    def cell_count(self) -> int:
        return len(self.rects)

    def frac_rect(self, index: int) -> tuple[float, float, float, float]:
        """Normalized (u0, v0, u1, v1); v grows downward like image rows."""
        x, y, w, h = self.rects[index]
        ih, iw = self.image.shape[:2]
        return (x / iw, y / ih, (x + w) / iw, (y + h) / ih)


@dataclass(frozen=True)
class GlyphAtlas:
    image: np.ndarray
    glyphs: dict            # char -> {"rect": (x, y, w, h), "advance": float}
    line_height: float

    @classmethod
    def load(cls, metrics_path) -> "GlyphAtlas":
        metrics_path = Path(metrics_path)
        meta = json.loads(metrics_path.read_text())
        image = load_image_rgba(metrics_path.parent / meta["image"])
        glyphs = {ch: {"rect": tuple(g["rect"]), "advance": float(g["advance"])}
                  for ch, g in meta["glyphs"].items()}
        if "?" not in glyphs:
            raise SpecError("glyph atlas must include '?' as the substitution glyph")
        return cls(image=image, glyphs=glyphs, line_height=float(meta["line_height"]))

    def has(self, ch: str) -> bool:
        return ch in self.glyphs

    def advance(self, ch: str) -> float:
        return self.glyphs[ch if ch in self.glyphs else "?"]["advance"]

    def frac_rect(self, ch: str) -> tuple[float, float, float, float]:
        x, y, w, h = self.glyphs[ch if ch in self.glyphs else "?"]["rect"]
        ih, iw = self.image.shape[:2]
        return (x / iw, y / ih, (x + w) / iw, (y + h) / ih)

    def px_rect(self, ch: str):
        return self.glyphs[ch if ch in self.glyphs else "?"]["rect"]


_BUILTIN_CACHE: dict[str, object] = {}


def builtin_glyph_atlas() -> GlyphAtlas:
    """The packaged ASCII glyph atlas."""
    if "glyphs" not in _BUILTIN_CACHE:
        base = resources.files("layerstack").joinpath("assets")
        with resources.as_file(base.joinpath("glyph_atlas.json")) as p:
            _BUILTIN_CACHE["glyphs"] = GlyphAtlas.load(p)
    return _BUILTIN_CACHE["glyphs"]


def builtin_icon_atlas() -> IconAtlas:
    """The packaged 2x2 marker icon atlas (disc, square, diamond, ring)."""
    if "icons" not in _BUILTIN_CACHE:
        base = resources.files("layerstack").joinpath("assets")
        with resources.as_file(base.joinpath("icon_atlas.png")) as p:
            img = load_image_rgba(p)
        _BUILTIN_CACHE["icons"] = IconAtlas.from_grid(img, rows=2, cols=2)
    return _BUILTIN_CACHE["icons"]


def resolve_icon_atlas(value, base_dir=None) -> IconAtlas:
    """Accept an IconAtlas, a 'builtin' marker, or an atlas spec dict."""
    if isinstance(value, IconAtlas):
        return value
    if value in (None, "builtin"):
        return builtin_icon_atlas()
    if isinstance(value, dict):
        path = Path(value["image"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        img = load_image_rgba(path)
        if "rects" in value:
            return IconAtlas(image=img, rects=tuple(tuple(r) for r in value["rects"]))
        return IconAtlas.from_grid(img, rows=int(value["rows"]), cols=int(value["cols"]))
    raise SpecError(f"cannot interpret icon atlas {value!r}")


def resolve_glyph_atlas(value, base_dir=None) -> GlyphAtlas:
    if isinstance(value, GlyphAtlas):
        return value
    if value in (None, "builtin"):
        return builtin_glyph_atlas()
    path = Path(value)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return GlyphAtlas.load(path)
