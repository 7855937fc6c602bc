"""Image generation stages: edge-conditioned template creation, pseudo
foreground segmentation, over-imagination detection, template repainting,
copy-paste compositing, and refinement.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .agents import AgentClient, ImageTaskRequest
from .errors import AnywhereError, DimensionMismatchError, PayloadError
from .mask_ops import composite_copy_paste, dilate, mask_subtract, overlap_stats
from .raster import BinaryMask, EdgeMap, OverlapStats, RasterImage, encode_mask_png, encode_png
from .prompt_generation import FinalPrompt

DEFAULT_TAU = 0.01
DEFAULT_DILATE_RADIUS = 8  # at 1024 px; scaled proportionally to resolution
DEFAULT_REFINE_STRENGTH = 0.3


@dataclass(frozen=True)
class TemplateImage:
    image: RasterImage
    pseudo_mask: BinaryMask | None = None
    repainted: bool = False


@dataclass(frozen=True)
class DetectionResult:
    stats: OverlapStats
    triggered: bool
    repaint_mask: BinaryMask


@dataclass(frozen=True)
class CandidateImage:
    image: RasterImage
    provenance: dict = field(default_factory=dict)


def scaled_dilate_radius(resolution: int, base_radius: int = DEFAULT_DILATE_RADIUS) -> int:
    return max(1, round(base_radius * resolution / 1024))


def generate_template(client: AgentClient, edge: EdgeMap, prompt: FinalPrompt,
                      seed: int, resolution: int) -> TemplateImage:
    """One canny-to-image call conditioned on the rendered edge map."""
    if edge.width != resolution or edge.height != resolution:
        raise DimensionMismatchError(
            f"edge map {edge.width}x{edge.height} != generation resolution {resolution}"
        )
    request = ImageTaskRequest(
        task="canny2img",
        images={"edge": encode_mask_png(edge)},
        prompt=prompt.assembled,
        seed=seed,
    )
    try:
        image = client.call_image_task("template_generator", request, stage="template")
    except AnywhereError as err:
        raise err.tagged("template")
    if not isinstance(image, RasterImage):
        raise PayloadError("canny2img reply was not an image").tagged("template")
    return TemplateImage(image=image)


def segment_pseudo_foreground(client: AgentClient, template: TemplateImage,
                              seed: int) -> TemplateImage:
    """Segment the template's subject; returns the template with its pseudo
    mask filled in."""
    request = ImageTaskRequest(
        task="segment",
        images={"image": encode_png(template.image)},
        seed=seed,
    )
    try:
        mask = client.call_image_task("segmenter", request, stage="segment")
    except AnywhereError as err:
        raise err.tagged("segment")
    if not isinstance(mask, BinaryMask):
        raise PayloadError("segment reply was not a mask").tagged("segment")
    if not mask.same_size(template.image):
        raise PayloadError(
            f"pseudo mask {mask.width}x{mask.height} does not match template "
            f"{template.image.width}x{template.image.height}"
        ).tagged("segment")
    return replace(template, pseudo_mask=mask)


def detect_over_imagination(fg_mask: BinaryMask, pseudo_mask: BinaryMask,
                            tau: float = DEFAULT_TAU,
                            margin_radius: int = DEFAULT_DILATE_RADIUS) -> DetectionResult:
    """Flag extraneous pseudo-foreground content.

    Triggered when the share of the pseudo mask outside the foreground
    exceeds tau. The repaint mask is pseudo \\ fg dilated by margin_radius so
    inpainting covers seams; it is empty when not triggered.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must be in [0,1), got {tau}")
    stats = overlap_stats(fg_mask, pseudo_mask)
    triggered = stats.excess_ratio > tau
    if triggered:
        repaint = dilate(mask_subtract(pseudo_mask, fg_mask), margin_radius)
    else:
        repaint = BinaryMask(np.zeros_like(pseudo_mask.bits))
    return DetectionResult(stats=stats, triggered=triggered, repaint_mask=repaint)


def background_prompt(prompt: FinalPrompt, object_name: str) -> str:
    """Scene text with the object name stripped, so the inpainter fills
    background instead of regrowing the subject."""
    text = prompt.scene_text.replace(object_name, "").replace("  ", " ").strip(" ,")
    return text or prompt.scene_text


def repaint_template(client: AgentClient, template: TemplateImage,
                     detection: DetectionResult, prompt: FinalPrompt,
                     object_name: str, seed: int) -> TemplateImage:
    """Inpaint the non-overlap region of the template with a background-only
    prompt; only valid when detection triggered."""
    if not detection.triggered:
        raise ValueError("repaint_template requires a triggered detection")
    request = ImageTaskRequest(
        task="inpaint",
        images={
            "image": encode_png(template.image),
            "mask": encode_mask_png(detection.repaint_mask),
        },
        prompt=background_prompt(prompt, object_name),
        seed=seed,
    )
    try:
        image = client.call_image_task("inpainter", request, stage="repaint")
    except AnywhereError as err:
        raise err.tagged("repaint")
    if not isinstance(image, RasterImage) or not image.same_size(template.image):
        raise PayloadError("inpaint reply has wrong shape").tagged("repaint")
    return replace(template, image=image, repainted=True)


def compose_and_refine(client: AgentClient, foreground: RasterImage,
                       template: TemplateImage, prompt: FinalPrompt,
                       seed: int, refine_strength: float = DEFAULT_REFINE_STRENGTH,
                       iteration: int = 1) -> tuple[RasterImage, CandidateImage]:
    """Copy-paste the foreground over the template, then refine the composite.

    Returns (composite, candidate) so the orchestrator can persist both.
    """
    if not 0.0 <= refine_strength <= 1.0:
        raise ValueError(f"refine_strength must be in [0,1], got {refine_strength}")
    composite = composite_copy_paste(foreground, template.image)
    request = ImageTaskRequest(
        task="img2img",
        images={"image": encode_png(composite)},
        prompt=prompt.assembled,
        seed=seed,
        strength=refine_strength,
    )
    try:
        refined = client.call_image_task("refiner", request, stage="refine")
    except AnywhereError as err:
        raise err.tagged("refine")
    if not isinstance(refined, RasterImage):
        raise PayloadError("img2img reply was not an image").tagged("refine")
    candidate = CandidateImage(
        image=refined,
        provenance={
            "seed": seed,
            "prompt": prompt.assembled,
            "template_repainted": template.repainted,
            "iteration": iteration,
        },
    )
    return composite, candidate
