"""Pure mask and compositing math: binarization, set algebra, morphology,
overlap metrics, and alpha copy-paste compositing.

Every function is deterministic and side-effect free; identical inputs yield
bit-identical outputs.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError, MissingAlphaError
from .raster import BinaryMask, OverlapStats, RasterImage


def _check_same_size(a, b) -> None:
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def binarize_alpha(image: RasterImage, threshold: int = 128) -> BinaryMask:
    """Threshold the alpha channel: bit = (alpha >= threshold)."""
    if not image.has_alpha:
        raise MissingAlphaError("binarize_alpha requires a 4-channel image")
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    return BinaryMask(image.pixels[:, :, 3] >= threshold)


def mask_subtract(a: BinaryMask, b: BinaryMask) -> BinaryMask:
    """Set difference a \\ b, pointwise a AND NOT b."""
    _check_same_size(a, b)
    return BinaryMask(a.bits & ~b.bits)


def mask_intersect(a: BinaryMask, b: BinaryMask) -> BinaryMask:
    _check_same_size(a, b)
    return BinaryMask(a.bits & b.bits)


def mask_union(a: BinaryMask, b: BinaryMask) -> BinaryMask:
    _check_same_size(a, b)
    return BinaryMask(a.bits | b.bits)


def overlap_stats(fg: BinaryMask, pseudo: BinaryMask) -> OverlapStats:
    """Overlap metrics between the foreground mask and the pseudo mask.

    excess_ratio quantifies how much of the pseudo mask lies outside the
    foreground: |pseudo \\ fg| / |pseudo|, defined as 0 for an empty pseudo.
    """
    _check_same_size(fg, pseudo)
    return OverlapStats(
        fg_area=fg.area,
        pseudo_area=pseudo.area,
        intersection_area=int((fg.bits & pseudo.bits).sum()),
    )


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Dilate with a square structuring element of side 2*radius + 1.

    A bit is set iff any input bit lies within Chebyshev distance <= radius.
    radius 0 is the identity.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if radius == 0 or not mask.bits.any():
        return BinaryMask(mask.bits.copy())
    side = 2 * radius + 1
    out = ndimage.maximum_filter(mask.bits, size=side, mode="constant", cval=False)
    return BinaryMask(out)


def composite_copy_paste(foreground: RasterImage, background: RasterImage) -> RasterImage:
    """Alpha-composite the RGBA foreground over the RGB background.

    out = alpha*fg + (1-alpha)*bg per channel, alpha in [0,1] from the 8-bit
    alpha sample, rounded half-up so results are bit-exact across platforms.
    """
    alpha8 = foreground.require_alpha()
    _check_same_size(foreground, background)
    fg = foreground.rgb().astype(np.uint32)
    bg = background.rgb().astype(np.uint32)
    a = alpha8.astype(np.uint32)[:, :, None]
    # fixed-point blend: (fg*a + bg*(255-a)) / 255, rounded half-up
    num = fg * a + bg * (255 - a)
    out = (num * 2 + 255) // (2 * 255)
    return RasterImage(out.astype(np.uint8))
