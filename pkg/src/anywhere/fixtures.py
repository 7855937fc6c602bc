"""Synthetic RGBA foreground fixtures.

Procedurally drawn objects on transparent canvases, deterministic per index,
used by selftest, batch smoke runs, and the test suite. Nothing here is a
real photograph; the shapes just need crisp alpha boundaries so masks and
edge maps behave like real cutouts.
"""
from __future__ import annotations

import numpy as np

from .raster import RasterImage, encode_png

FIXTURE_COUNT = 25

_PALETTE = (
    (178, 34, 34), (46, 139, 87), (70, 130, 180), (218, 165, 32), (139, 69, 19),
    (106, 90, 205), (205, 92, 92), (0, 128, 128), (184, 134, 11), (112, 128, 144),
)


def _blank(size: int) -> np.ndarray:
    return np.zeros((size, size, 4), dtype=np.uint8)


def _paint(canvas: np.ndarray, y0, y1, x0, x1, color) -> None:
    canvas[y0:y1, x0:x1, :3] = color
    canvas[y0:y1, x0:x1, 3] = 255


def _chair(canvas: np.ndarray, s: int, color) -> None:
    q = s // 8
    _paint(canvas, q, 5 * q, 2 * q, 2 * q + q // 2, color)          # backrest
    _paint(canvas, 4 * q, 5 * q, 2 * q, 6 * q, color)               # seat
    _paint(canvas, 5 * q, 7 * q, 2 * q, 2 * q + q // 2, color)      # front leg
    _paint(canvas, 5 * q, 7 * q, 5 * q + q // 2, 6 * q, color)      # rear leg


def _cup(canvas: np.ndarray, s: int, color) -> None:
    yy, xx = np.mgrid[0:s, 0:s]
    c = s // 2
    body = (np.abs(xx - c) < s // 4) & (yy > s // 4) & (yy < 3 * s // 4)
    handle = ((xx - 3 * s // 4) ** 2 + (yy - c) ** 2 < (s // 8) ** 2) & (
        (xx - 3 * s // 4) ** 2 + (yy - c) ** 2 > (s // 14) ** 2
    )
    region = body | handle
    canvas[region, :3] = color
    canvas[region, 3] = 255


def _ball(canvas: np.ndarray, s: int, color) -> None:
    yy, xx = np.mgrid[0:s, 0:s]
    c = s // 2
    region = (xx - c) ** 2 + (yy - c) ** 2 < (s // 3) ** 2
    canvas[region, :3] = color
    canvas[region, 3] = 255


def _lamp(canvas: np.ndarray, s: int, color) -> None:
    q = s // 8
    _paint(canvas, q, 3 * q, 2 * q, 6 * q, color)                   # shade
    _paint(canvas, 3 * q, 6 * q, 4 * q - q // 4, 4 * q + q // 4, color)  # stem
    _paint(canvas, 6 * q, 7 * q, 2 * q, 6 * q, color)               # base


def _robot(canvas: np.ndarray, s: int, color) -> None:
    q = s // 8
    _paint(canvas, q, 3 * q, 3 * q, 5 * q, color)                   # head
    _paint(canvas, 3 * q, 6 * q, 2 * q, 6 * q, color)               # torso
    _paint(canvas, 3 * q, 5 * q, q, 2 * q, color)                   # left arm
    _paint(canvas, 3 * q, 5 * q, 6 * q, 7 * q, color)               # right arm
    _paint(canvas, 6 * q, 7 * q, 2 * q + q // 2, 3 * q + q // 2, color)
    _paint(canvas, 6 * q, 7 * q, 4 * q + q // 2, 5 * q + q // 2, color)


_SHAPES = (_chair, _cup, _ball, _lamp, _robot)


def make_foreground(index: int, size: int = 128) -> RasterImage:
    """Fixture ``index`` (0-based) as an RGBA raster."""
    canvas = _blank(size)
    shape = _SHAPES[index % len(_SHAPES)]
    color = _PALETTE[index % len(_PALETTE)]
    shape(canvas, size, color)
    return RasterImage(canvas)


def make_foreground_png(index: int, size: int = 128) -> bytes:
    return encode_png(make_foreground(index, size))


def write_fixture_pack(directory, count: int = FIXTURE_COUNT, size: int = 128) -> list:
    """Materialize ``count`` fixture PNGs into ``directory``; returns paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        path = directory / f"fixture_{i:02d}.png"
        path.write_bytes(make_foreground_png(i, size))
        paths.append(path)
    return paths
