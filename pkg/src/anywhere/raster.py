"""Core raster types and PNG serialization.

Images are thin wrappers over uint8 numpy arrays in (height, width, channels)
layout; masks wrap boolean (height, width) arrays. All wrappers validate their
invariants on construction and are treated as immutable by every operation.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import MissingAlphaError


@dataclass(frozen=True)
class RasterImage:
    """Decoded RGB or RGBA pixel grid."""

    pixels: np.ndarray  # uint8, shape (h, w, 3|4)

    def __post_init__(self) -> None:
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] not in (3, 4):
            raise ValueError(f"expected (h, w, 3|4) pixel array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def has_alpha(self) -> bool:
        return self.channels == 4

    def require_alpha(self) -> np.ndarray:
        if not self.has_alpha:
            raise MissingAlphaError("image has no alpha channel")
        return self.pixels[:, :, 3]

    def rgb(self) -> np.ndarray:
        return self.pixels[:, :, :3]

    def same_size(self, other: "RasterImage | BinaryMask") -> bool:
        return self.width == other.width and self.height == other.height


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel boolean grid; True means inside the mask."""

    bits: np.ndarray  # bool, shape (h, w)

    def __post_init__(self) -> None:
        bits = np.ascontiguousarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError(f"expected (h, w) bit array, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def same_size(self, other: "BinaryMask | RasterImage") -> bool:
        return self.width == other.width and self.height == other.height


# An edge map is structurally a binary mask; the alias keeps signatures honest.
EdgeMap = BinaryMask


@dataclass(frozen=True)
class OverlapStats:
    """Pixel-count overlap metrics between a foreground mask and a pseudo mask."""

    fg_area: int
    pseudo_area: int
    intersection_area: int
    excess_area: int = field(init=False)
    excess_ratio: float = field(init=False)

    def __post_init__(self) -> None:
        if self.intersection_area > min(self.fg_area, self.pseudo_area):
            raise ValueError("intersection exceeds a constituent area")
        excess = self.pseudo_area - self.intersection_area
        ratio = excess / self.pseudo_area if self.pseudo_area > 0 else 0.0
        object.__setattr__(self, "excess_area", excess)
        object.__setattr__(self, "excess_ratio", ratio)


def decode_png(data: bytes) -> RasterImage:
    """Decode PNG bytes into an RGB or RGBA raster."""
    with Image.open(io.BytesIO(data)) as im:
        if im.mode not in ("RGB", "RGBA"):
            im = im.convert("RGBA" if "A" in im.getbands() or im.mode == "P" else "RGB")
        return RasterImage(np.asarray(im, dtype=np.uint8))


def encode_png(image: RasterImage) -> bytes:
    """Encode a raster as PNG bytes (deterministic, uncompressed-agnostic)."""
    mode = "RGBA" if image.has_alpha else "RGB"
    buf = io.BytesIO()
    Image.fromarray(image.pixels, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes) -> BinaryMask:
    """Decode a single-channel PNG (0/255 convention) into a mask."""
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return BinaryMask(arr >= 128)


def encode_mask_png(mask: BinaryMask) -> bytes:
    """Encode a mask as single-channel PNG with 0/255 values."""
    buf = io.BytesIO()
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def letterbox(image: RasterImage, size: int) -> RasterImage:
    """Scale an RGBA foreground to fit a square canvas, centered, aspect kept.

    The surrounding canvas is fully transparent so downstream masking and edge
    extraction see no synthetic content.
    """
    alpha = image.require_alpha()
    _ = alpha  # presence check only
    scale = size / max(image.width, image.height)
    new_w = max(1, round(image.width * scale))
    new_h = max(1, round(image.height * scale))
    pil = Image.fromarray(image.pixels, mode="RGBA")
    # nearest keeps alpha edges hard, so the binarized mask stays crisp
    resized = pil.resize((new_w, new_h), Image.NEAREST)
    canvas = np.zeros((size, size, 4), dtype=np.uint8)
    x0 = (size - new_w) // 2
    y0 = (size - new_h) // 2
    canvas[y0 : y0 + new_h, x0 : x0 + new_w] = np.asarray(resized, dtype=np.uint8)
    return RasterImage(canvas)
