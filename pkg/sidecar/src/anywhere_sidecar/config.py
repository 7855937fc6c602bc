from __future__ import annotations

from dataclasses import dataclass, field

CHAT_ROLES = ("narrator", "thinker", "ranker", "analyzer")
IMAGE_ROLES = ("segmenter", "template_generator", "inpainter", "refiner")
ROLES = CHAT_ROLES + IMAGE_ROLES

IMAGE_TASKS = ("segment", "canny2img", "inpaint", "img2img")

# role serving each image task
TASK_ROLES = {
    "segment": "segmenter",
    "canny2img": "template_generator",
    "inpaint": "inpainter",
    "img2img": "refiner",
}

DEFAULT_MAX_PAYLOAD = 32 * 1024 * 1024


@dataclass
class SidecarConfig:
    """Which backend serves each role and where to listen.

    ``models`` maps role -> model identifier; "builtin" binds the
    procedural CPU backend shipped with this package. Roles absent from
    the map are not advertised and their requests fail with 422.
    """

    host: str = "127.0.0.1"
    port: int = 8800
    device: str = "cpu"
    models: dict[str, str] = field(default_factory=lambda: {r: "builtin" for r in ROLES})
    api_key: str | None = None
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD
    request_timeout: float = 60.0

    def validate(self) -> "SidecarConfig":
        unknown = [r for r in self.models if r not in ROLES]
        if unknown:
            raise ValueError(f"unknown role(s) in models: {', '.join(unknown)}")
        if self.max_payload_bytes <= 0:
            raise ValueError("max_payload_bytes must be > 0")
        if not 1 <= self.port <= 65535:
            raise ValueError("port must be in 1..65535")
        return self

    @property
    def bound_roles(self) -> list[str]:
        return [r for r in ROLES if r in self.models]
