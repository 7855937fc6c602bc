"""Prompt generation: narrate the foreground, brainstorm candidate scenes,
rank them, and assemble the final diffusion prompt.

The agent instructions are shipped as verbatim template assets with named
slots; rendering only ever substitutes slot text, so golden-string tests can
hold the surrounding bytes fixed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .agents import AgentClient, ChatRequest
from .agents.schemas import FOREGROUND_DESCRIPTION, SCENE_RANKING, SCENE_SET
from .errors import AnywhereError
from .raster import RasterImage, encode_png

FIRST_ROUND_FEEDBACK = "none"


def load_template(name: str) -> str:
    return (
        resources.files("anywhere.templates").joinpath(f"{name}.txt").read_text("utf-8")
    )


@dataclass(frozen=True)
class ForegroundDescription:
    description: str
    object_name: str
    viewpoint: str


@dataclass(frozen=True)
class SceneSet:
    scenes: list[str]
    generation_feedback: str = ""


@dataclass(frozen=True)
class SceneRanking:
    ranks: list[int]  # permutation of 1..N, aligned with SceneSet.scenes; 1 = best


@dataclass(frozen=True)
class FinalPrompt:
    scene_text: str
    assembled: str


# -- template rendering ---------------------------------------------------

def render_narrator_prompt(client: AgentClient) -> str:
    template = load_template("narrator")
    return template.replace(
        "{YOUR_JSON_FORMAT}", client.schemas.model_text(FOREGROUND_DESCRIPTION)
    )


def render_thinker_prompt(client: AgentClient, desc: ForegroundDescription,
                          feedback: str) -> str:
    template = load_template("thinker")
    n = client.schemas.n_scenes
    if n != 5:
        template = template.replace("give 5 sets", f"give {n} sets")
    return (
        template.replace("{object_name}", desc.object_name)
        .replace("{viewpoint}", desc.viewpoint)
        .replace("{feedback}", feedback)
        .replace("{prompt}", desc.description)
        .replace("{YOUR_JSON_FORMAT}", client.schemas.model_text(SCENE_SET))
    )


def render_ranker_prompt(client: AgentClient, desc: ForegroundDescription,
                         scenes: SceneSet) -> str:
    template = load_template("ranker")
    n = client.schemas.n_scenes
    if n != 5:
        template = template.replace("(from 1 to 5)", f"(from 1 to {n})")
        template = template.replace(
            "these 5 scene description", f"these {n} scene description"
        )
    return (
        template.replace("{img_desc}", desc.description)
        .replace("{scene_descs}", json.dumps(scenes.scenes, ensure_ascii=False))
        .replace("{json_format}", client.schemas.model_text(SCENE_RANKING))
    )


# -- operations -----------------------------------------------------------

def narrate_foreground(client: AgentClient, foreground: RasterImage,
                       seed: int | None = None) -> ForegroundDescription:
    """Ask the narrator for description, object name, and viewpoint."""
    foreground.require_alpha()
    request = ChatRequest(
        system_prompt="",
        user_prompt=render_narrator_prompt(client),
        response_schema_id=FOREGROUND_DESCRIPTION,
        image_png=encode_png(foreground),
        seed=seed,
    )
    try:
        response = client.call_chat("narrator", request, stage="narration")
    except AnywhereError as err:
        raise err.tagged("narration")
    parsed = response.parsed
    return ForegroundDescription(
        description=parsed["description"],
        object_name=parsed["name"],
        viewpoint=parsed["viewpoint"],
    )


def brainstorm_scenes(client: AgentClient, desc: ForegroundDescription,
                      feedback: str = "", seed: int | None = None) -> SceneSet:
    """Ask the divergent thinker for N candidate scene descriptions."""
    feedback_text = feedback or FIRST_ROUND_FEEDBACK
    request = ChatRequest(
        system_prompt="",
        user_prompt=render_thinker_prompt(client, desc, feedback_text),
        response_schema_id=SCENE_SET,
        seed=seed,
    )
    try:
        response = client.call_chat("thinker", request, stage="brainstorm")
    except AnywhereError as err:
        raise err.tagged("brainstorm")
    return SceneSet(scenes=response.parsed["scenes"],
                    generation_feedback=feedback or "")


def rank_scenes(client: AgentClient, desc: ForegroundDescription,
                scenes: SceneSet, seed: int | None = None) -> SceneRanking:
    """Ask the ranker for a relevance ordering over the candidate scenes."""
    request = ChatRequest(
        system_prompt="",
        user_prompt=render_ranker_prompt(client, desc, scenes),
        response_schema_id=SCENE_RANKING,
        seed=seed,
    )
    try:
        response = client.call_chat("ranker", request, stage="rank")
    except AnywhereError as err:
        raise err.tagged("rank")
    return SceneRanking(ranks=response.parsed["ranks"])


def select_and_assemble(scenes: SceneSet, ranking: SceneRanking,
                        desc: ForegroundDescription) -> FinalPrompt:
    """Pick the rank-1 scene and join it with the object name and viewpoint."""
    top_index = ranking.ranks.index(1)
    scene_text = scenes.scenes[top_index]
    assembled = f"{scene_text}, {desc.object_name}, {desc.viewpoint}"
    return FinalPrompt(scene_text=scene_text, assembled=assembled)
