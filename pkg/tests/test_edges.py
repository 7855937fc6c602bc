import numpy as np
import pytest

from anywhere.edges import canny_edges, to_grayscale
from anywhere.errors import InvalidThresholdsError
from anywhere.raster import RasterImage

from oracles import rec601_gray_over_white, reference_canny


def gray_image(arr):
    g = np.asarray(arr, dtype=np.uint8)
    return RasterImage(np.repeat(g[:, :, None], 3, axis=2))


def f1_score(pred: np.ndarray, truth: np.ndarray) -> float:
    tp = int((pred & truth).sum())
    fp = int((pred & ~truth).sum())
    fn = int((~pred & truth).sum())
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def test_uniform_image_has_no_edges():
    img = gray_image(np.full((16, 16), 127))
    assert canny_edges(img, 50, 100).area == 0


def test_one_pixel_image_empty():
    img = gray_image(np.array([[200]]))
    assert canny_edges(img, 50, 100).area == 0


def test_threshold_order_enforced():
    with pytest.raises(InvalidThresholdsError):
        canny_edges(gray_image(np.zeros((8, 8))), 200, 100)


def test_vertical_step_edge_band():
    arr = np.zeros((32, 32), dtype=np.uint8)
    arr[:, 16:] = 255
    edges = canny_edges(gray_image(arr), 50, 100)
    ys, xs = np.nonzero(edges.bits)
    assert len(xs) > 0
    assert xs.min() >= 14 and xs.max() <= 17
    # band is contiguous through all non-border rows
    assert set(ys) == set(range(1, 31))
    ref = reference_canny(arr.astype(np.float64), 50, 100)
    assert f1_score(edges.bits, ref) >= 0.95


def test_matches_reference_on_shapes():
    rng = np.random.default_rng(7)
    cases = []
    # step edges at several offsets
    for col in (8, 16, 24):
        a = np.zeros((32, 32), dtype=np.uint8)
        a[:, col:] = 220
        cases.append(a)
    # ramp and circle
    cases.append(np.tile(np.linspace(0, 255, 32).astype(np.uint8), (32, 1)))
    yy, xx = np.mgrid[0:32, 0:32]
    cases.append(np.where((yy - 16) ** 2 + (xx - 16) ** 2 < 100, 255, 0).astype(np.uint8))
    cases.append(rng.integers(0, 2, (24, 24)).astype(np.uint8) * 255)
    for arr in cases:
        ours = canny_edges(gray_image(arr), 60, 120).bits
        ref = reference_canny(arr.astype(np.float64), 60, 120)
        assert f1_score(ours, ref) >= 0.95


def test_grayscale_flattens_alpha_over_white():
    px = np.zeros((4, 4, 4), dtype=np.uint8)
    px[:, :, :3] = 40
    px[:2, :, 3] = 255  # top half opaque, bottom transparent
    gray = to_grayscale(RasterImage(px))
    assert np.allclose(gray, rec601_gray_over_white(px))
    assert np.allclose(gray[2:], 255.0)  # transparent rows read as white


def test_transparent_region_contributes_no_edges():
    # constant color under varying alpha in a fully transparent area
    px = np.zeros((16, 16, 4), dtype=np.uint8)
    px[:, :, :3] = 255
    px[:, :, 3] = 0
    assert canny_edges(RasterImage(px), 50, 100).area == 0
