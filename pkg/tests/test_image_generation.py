import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anywhere.agents import AgentClient, AgentEndpoint
from anywhere.agents.mocks import build_mock_transport
from anywhere.agents.schemas import SchemaRegistry
from anywhere.errors import DimensionMismatchError
from anywhere.fixtures import make_foreground
from anywhere.image_generation import (
    background_prompt,
    compose_and_refine,
    detect_over_imagination,
    generate_template,
    repaint_template,
    scaled_dilate_radius,
    segment_pseudo_foreground,
)
from anywhere.mask_ops import binarize_alpha, composite_copy_paste, mask_subtract
from anywhere.outcome_analyzer import QUESTION_IDS
from anywhere.prompt_generation import FinalPrompt
from anywhere.raster import BinaryMask, RasterImage, letterbox

from oracles import brute_overlap

RES = 64
PROMPT = FinalPrompt(scene_text="a sunlit cafe terrace",
                     assembled="a sunlit cafe terrace, wooden chair, horizontal view")


def make_client(pseudo_dilate=6, refiner_mode="identity"):
    roles = ("narrator", "thinker", "ranker", "analyzer",
             "segmenter", "template_generator", "inpainter", "refiner")
    transport = build_mock_transport(QUESTION_IDS, pseudo_dilate=pseudo_dilate,
                                    refiner_mode=refiner_mode)
    return AgentClient(transport=transport,
                       endpoints={r: AgentEndpoint(role=r, base_url="mock://local")
                                  for r in roles},
                       schemas=SchemaRegistry(question_ids=QUESTION_IDS),
                       backoff_base=0.0)


@pytest.fixture
def foreground():
    return letterbox(make_foreground(0, 48), RES)


@pytest.fixture
def edge(foreground):
    from anywhere.edges import canny_edges

    return canny_edges(foreground, 100, 200)


def square_mask(size, y0, y1, x0, x1):
    bits = np.zeros((size, size), dtype=bool)
    bits[y0:y1, x0:x1] = True
    return BinaryMask(bits)


class TestGenerateTemplate:
    def test_deterministic_replay(self, edge):
        a = generate_template(make_client(), edge, PROMPT, seed=3, resolution=RES)
        b = generate_template(make_client(), edge, PROMPT, seed=3, resolution=RES)
        assert (a.image.pixels == b.image.pixels).all()
        assert a.repainted is False and a.pseudo_mask is None

    def test_seed_changes_background(self, edge):
        a = generate_template(make_client(), edge, PROMPT, seed=3, resolution=RES)
        b = generate_template(make_client(), edge, PROMPT, seed=4, resolution=RES)
        assert (a.image.pixels != b.image.pixels).any()

    def test_resolution_mismatch_rejected(self, edge):
        with pytest.raises(DimensionMismatchError):
            generate_template(make_client(), edge, PROMPT, seed=3, resolution=RES * 2)


class TestSegmentPseudoForeground:
    def test_mask_covers_subject(self, foreground, edge):
        client = make_client(pseudo_dilate=0)
        template = generate_template(client, edge, PROMPT, seed=1, resolution=RES)
        template = segment_pseudo_foreground(client, template, seed=1)
        assert template.pseudo_mask is not None
        assert template.pseudo_mask.same_size(template.image)
        assert template.pseudo_mask.area > 0

    def test_all_background_template_not_triggered(self, foreground):
        # a template with no pure-white subject segments to an empty mask
        client = make_client()
        from anywhere.image_generation import TemplateImage

        plain = TemplateImage(image=RasterImage(
            np.full((RES, RES, 3), 90, dtype=np.uint8)))
        segged = segment_pseudo_foreground(client, plain, seed=0)
        assert segged.pseudo_mask.area == 0
        fg_mask = binarize_alpha(foreground)
        detection = detect_over_imagination(fg_mask, segged.pseudo_mask, tau=0.01)
        assert detection.stats.excess_ratio == 0.0
        assert detection.triggered is False


class TestDetectOverImagination:
    def test_subset_not_triggered(self):
        fg = square_mask(32, 4, 28, 4, 28)
        pseudo = square_mask(32, 8, 24, 8, 24)
        detection = detect_over_imagination(fg, pseudo, tau=0.01)
        assert detection.stats.excess_ratio == 0.0
        assert not detection.triggered
        assert detection.repaint_mask.area == 0

    def test_excess_square_triggers(self):
        fg = square_mask(32, 0, 20, 0, 20)       # 400 px
        pseudo = square_mask(32, 0, 20, 0, 25)   # 500 px, 400 shared
        detection = detect_over_imagination(fg, pseudo, tau=0.01, margin_radius=2)
        stats = detection.stats
        assert (stats.fg_area, stats.pseudo_area, stats.intersection_area) == (400, 500, 400)
        assert stats.excess_ratio == pytest.approx(0.2)
        assert detection.triggered
        assert detection.repaint_mask.area >= 100
        # brute-force check on the same masks
        assert brute_overlap(fg.bits, pseudo.bits)[:4] == (400, 500, 400, 100)

    def test_threshold_boundary_not_triggered(self):
        fg = square_mask(64, 0, 50, 0, 20)        # 1000 px
        pseudo_bits = fg.bits.copy()
        pseudo_bits[50, 0] = pseudo_bits[50, 1] = True  # 2 px excess of 1002
        pseudo = BinaryMask(pseudo_bits)
        detection = detect_over_imagination(fg, pseudo, tau=0.01)
        assert detection.stats.excess_ratio < 0.01
        assert not detection.triggered

    def test_repaint_mask_contains_difference(self):
        fg = square_mask(32, 0, 16, 0, 16)
        pseudo = square_mask(32, 8, 24, 8, 24)
        detection = detect_over_imagination(fg, pseudo, tau=0.0, margin_radius=3)
        difference = mask_subtract(pseudo, fg)
        assert not (difference.bits & ~detection.repaint_mask.bits).any()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone_in_excess(self, seed):
        rng = np.random.default_rng(seed)
        fg = BinaryMask(rng.random((16, 16)) > 0.5)
        pseudo = BinaryMask(rng.random((16, 16)) > 0.5)
        base = detect_over_imagination(fg, pseudo, tau=0.5).stats
        # grow pseudo strictly outside fg: excess_ratio must not decrease
        grown_bits = pseudo.bits | (~fg.bits & (rng.random((16, 16)) > 0.5))
        grown = detect_over_imagination(fg, BinaryMask(grown_bits), tau=0.5).stats
        assert grown.excess_ratio >= base.excess_ratio or grown.pseudo_area == 0

    def test_tau_range_enforced(self):
        fg = square_mask(8, 0, 4, 0, 4)
        with pytest.raises(ValueError):
            detect_over_imagination(fg, fg, tau=1.0)


class TestRepaintTemplate:
    def test_changes_only_masked_pixels(self, edge):
        client = make_client(pseudo_dilate=8)
        template = generate_template(client, edge, PROMPT, seed=2, resolution=RES)
        template = segment_pseudo_foreground(client, template, seed=2)
        fg_mask = square_mask(RES, 20, 44, 20, 44)
        detection = detect_over_imagination(fg_mask, template.pseudo_mask,
                                            tau=0.01, margin_radius=2)
        assert detection.triggered
        before = template.image.pixels.copy()
        repainted = repaint_template(client, template, detection, PROMPT,
                                     "wooden chair", seed=2)
        diff = (repainted.image.pixels != before).any(axis=2)
        assert not (diff & ~detection.repaint_mask.bits).any()
        assert repainted.repainted is True

    def test_requires_triggered_detection(self, edge):
        client = make_client()
        template = generate_template(client, edge, PROMPT, seed=2, resolution=RES)
        fg = square_mask(RES, 0, 8, 0, 8)
        detection = detect_over_imagination(fg, fg, tau=0.01)
        with pytest.raises(ValueError):
            repaint_template(client, template, detection, PROMPT, "chair", seed=2)


class TestBackgroundPrompt:
    def test_object_name_removed(self):
        prompt = FinalPrompt(scene_text="a cozy nook with a wooden chair by a window",
                             assembled="x")
        assert "wooden chair" not in background_prompt(prompt, "wooden chair")

    def test_falls_back_when_scene_is_only_the_object(self):
        prompt = FinalPrompt(scene_text="wooden chair", assembled="x")
        assert background_prompt(prompt, "wooden chair") == "wooden chair"


class TestComposeAndRefine:
    def test_identity_refiner_returns_composite(self, foreground, edge):
        client = make_client(refiner_mode="identity")
        template = generate_template(client, edge, PROMPT, seed=5, resolution=RES)
        composite, candidate = compose_and_refine(client, foreground, template,
                                                  PROMPT, seed=5, iteration=2)
        expected = composite_copy_paste(foreground, template.image)
        assert (composite.pixels == expected.pixels).all()
        assert (candidate.image.pixels == expected.pixels).all()
        assert candidate.provenance["iteration"] == 2
        assert candidate.provenance["template_repainted"] is False

    def test_fully_opaque_foreground_wins(self, edge):
        opaque = RasterImage(np.dstack([
            np.full((RES, RES, 3), 50, dtype=np.uint8),
            np.full((RES, RES, 1), 255, dtype=np.uint8),
        ]))
        client = make_client(refiner_mode="identity")
        template = generate_template(client, edge, PROMPT, seed=5, resolution=RES)
        _, candidate = compose_and_refine(client, opaque, template, PROMPT, seed=5)
        assert (candidate.image.pixels == opaque.pixels[:, :, :3]).all()

    def test_strength_validated(self, foreground, edge):
        client = make_client()
        template = generate_template(client, edge, PROMPT, seed=5, resolution=RES)
        with pytest.raises(ValueError):
            compose_and_refine(client, foreground, template, PROMPT, seed=5,
                               refine_strength=1.5)


def test_scaled_dilate_radius():
    assert scaled_dilate_radius(1024) == 8
    assert scaled_dilate_radius(512) == 4
    assert scaled_dilate_radius(64) == 1
