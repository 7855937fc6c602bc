"""Wire-protocol data types shared by every agent call.

All agents sit behind the same three HTTP paths:

    POST /v1/chat    ChatRequest body      -> {"text": "..."}
    POST /v1/image   ImageTaskRequest body -> {"image_b64": ...} or {"mask_b64": ...}
    GET  /v1/health                        -> {"status": "ok", "roles": [...]}

Binary images travel as base64 PNG fields. 200 = success, 422 = payload
error, 5xx = transport-retryable.
"""
from __future__ import annotations

import base64
from dataclasses import dataclass, field

from ..errors import PayloadError

CHAT_PATH = "/v1/chat"
IMAGE_PATH = "/v1/image"
HEALTH_PATH = "/v1/health"

CHAT_ROLES = ("narrator", "thinker", "ranker", "analyzer")
VISION_ROLES = ("narrator", "analyzer")
IMAGE_ROLES = ("segmenter", "template_generator", "inpainter", "refiner")
ROLES = CHAT_ROLES + IMAGE_ROLES

IMAGE_TASKS = ("segment", "canny2img", "inpaint", "img2img")

# images each task must carry, checked before anything hits the wire
_REQUIRED_IMAGES = {
    "segment": ("image",),
    "canny2img": ("edge",),
    "inpaint": ("image", "mask"),
    "img2img": ("image",),
}
_PROMPT_REQUIRED = ("canny2img", "inpaint", "img2img")


@dataclass(frozen=True)
class AgentEndpoint:
    """Where one pipeline role is served."""

    role: str
    base_url: str
    timeout: float = 60.0
    max_retries: int = 2
    auth_token: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    response_schema_id: str
    image_png: bytes | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")

    def to_wire(self, role: str) -> dict:
        body = {
            "role": role,
            "system_prompt": self.system_prompt,
            "user_prompt": self.user_prompt,
            "response_schema_id": self.response_schema_id,
        }
        if self.image_png is not None:
            body["image_b64"] = base64.b64encode(self.image_png).decode("ascii")
        if self.seed is not None:
            body["seed"] = self.seed
        return body


@dataclass(frozen=True)
class ImageTaskRequest:
    task: str
    images: dict[str, bytes]  # name -> PNG bytes
    seed: int
    prompt: str | None = None
    negative_prompt: str | None = None
    strength: float | None = None

    def validate(self) -> None:
        if self.task not in IMAGE_TASKS:
            raise PayloadError(f"unknown image task {self.task!r}")
        for name in _REQUIRED_IMAGES[self.task]:
            if name not in self.images:
                raise PayloadError(f"task {self.task!r} requires image {name!r}")
        if self.task in _PROMPT_REQUIRED and not self.prompt:
            raise PayloadError(f"task {self.task!r} requires a prompt")
        if self.task == "img2img":
            if self.strength is None or not 0.0 <= self.strength <= 1.0:
                raise PayloadError("img2img requires strength in [0,1]")

    def to_wire(self, role: str) -> dict:
        self.validate()
        body = {
            "role": role,
            "task": self.task,
            "images": {
                name: base64.b64encode(png).decode("ascii")
                for name, png in self.images.items()
            },
            "seed": self.seed,
        }
        if self.prompt is not None:
            body["prompt"] = self.prompt
        if self.negative_prompt is not None:
            body["negative_prompt"] = self.negative_prompt
        if self.strength is not None:
            body["strength"] = self.strength
        return body


@dataclass(frozen=True)
class StructuredResponse:
    raw_text: str
    parsed: dict
    attempts_used: int = field(default=1)
