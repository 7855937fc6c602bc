"""Deterministic in-process mock agents.

The mock transport answers the same wire protocol as a live sidecar, with
zero latency and fully scripted behavior, so end-to-end runs are byte-stable
and replayable. Chat roles are driven either by canned reply sequences or by
pure functions of the request body; image roles are procedural.
"""
from __future__ import annotations

import base64
import hashlib
import json
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from ..errors import TransportError
from ..raster import (
    BinaryMask,
    RasterImage,
    decode_mask_png,
    decode_png,
    encode_mask_png,
    encode_png,
)
from .protocol import CHAT_PATH, HEALTH_PATH, IMAGE_PATH, ROLES

# color the mock template generator reserves for the pseudo-subject
_SUBJECT_COLOR = (255, 255, 255)

_ENTITY_TABLE = (
    ("wooden chair", "a red wooden chair with four legs and a tall backrest"),
    ("ceramic cup", "a white ceramic cup with a curved handle and glossy glaze"),
    ("leather boot", "a brown leather boot with laces and a rubber sole"),
    ("table lamp", "a brass table lamp with a pleated fabric shade"),
    ("toy robot", "a blue toy robot with articulated arms and a round head"),
)

_SCENE_SETTINGS = (
    "a sunlit cafe terrace with wicker furniture",
    "a minimalist studio with soft diffuse lighting",
    "a rustic cabin interior with warm wooden walls",
    "a modern loft with large industrial windows",
    "a quiet library reading corner with tall shelves",
    "a seaside boardwalk at golden hour",
    "a botanical greenhouse full of ferns",
    "a cobblestone courtyard with ivy-covered walls",
    "a mid-century living room with a patterned rug",
    "a mountain lodge with a stone fireplace",
    "an artist workshop with scattered canvases",
    "a tidy kitchen counter with marble surfaces",
)


def _digest(*parts) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, bytes):
            h.update(part)
        else:
            h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return h.digest()


class ScriptedReplies:
    """Canned chat replies consumed in order; the last entry repeats."""

    def __init__(self, replies: list[str]):
        if not replies:
            raise ValueError("script needs at least one reply")
        self._replies = list(replies)
        self._position = 0
        self._lock = threading.Lock()

    def __call__(self, body: dict) -> str:
        with self._lock:
            reply = self._replies[min(self._position, len(self._replies) - 1)]
            self._position += 1
            return reply


def narrator_reply(body: dict) -> str:
    """Pick a stable entity from the input image digest."""
    digest = _digest(body.get("image_b64", ""))
    name, description = _ENTITY_TABLE[digest[0] % len(_ENTITY_TABLE)]
    return json.dumps(
        {"description": description, "name": name, "viewpoint": "horizontal view"}
    )


def thinker_reply(body: dict) -> str:
    """Five distinct scene settings chosen from the prompt digest; feedback in
    the prompt shifts the digest, so regeneration actually varies."""
    digest = _digest(body.get("user_prompt", ""), body.get("seed", 0))
    count = 5
    indices = []
    pos = 0
    while len(indices) < count:
        idx = digest[pos % len(digest)] % len(_SCENE_SETTINGS)
        pos += 1
        if idx not in indices:
            indices.append(idx)
        else:
            digest = _digest(digest, pos)
    return json.dumps({"scenes": [_SCENE_SETTINGS[i] for i in indices]})


def ranker_reply(body: dict) -> str:
    digest = _digest(body.get("user_prompt", ""), body.get("seed", 0))
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    ranks = rng.permutation(5) + 1
    return json.dumps({"ranks": [int(r) for r in ranks]})


class AnalyzerScript:
    """Yes/no answers per mandatory question, by policy.

    Policies: "always_pass", "always_fail", or "pass_on_call" with ``k``
    meaning the k-th analysis call (1-based) is the first to pass.
    """

    def __init__(self, question_ids, policy: str = "always_pass", k: int = 1):
        self.question_ids = tuple(question_ids)
        self.policy = policy
        self.k = k
        self._calls = 0
        self._lock = threading.Lock()

    def __call__(self, body: dict) -> str:
        with self._lock:
            self._calls += 1
            calls = self._calls
        if self.policy == "always_pass":
            passing = True
        elif self.policy == "always_fail":
            passing = False
        else:
            passing = calls >= self.k
        answers = {qid: "yes" for qid in self.question_ids}
        if not passing:
            answers[self.question_ids[0]] = "no"
        return json.dumps(answers)


@dataclass
class MockImageBackend:
    """Procedural image tools, pure functions of their request bodies.

    ``pseudo_dilate`` widens the painted pseudo-subject beyond the filled
    edge region, which widens the pseudo mask the segmenter later recovers;
    large values force over-imagination detection.
    """

    pseudo_dilate: int = 6
    refiner_mode: str = "identity"  # or "mean_shift"

    def segment(self, image: RasterImage) -> BinaryMask:
        rgb = image.rgb()
        subject = np.all(rgb == np.array(_SUBJECT_COLOR, dtype=np.uint8), axis=2)
        return BinaryMask(subject)

    def canny2img(self, edge: BinaryMask, prompt: str, seed: int) -> RasterImage:
        digest = _digest(prompt, seed)
        # background color capped below pure white so the subject stays unique
        bg = tuple(int(b) % 230 for b in digest[:3])
        canvas = np.empty((edge.height, edge.width, 3), dtype=np.uint8)
        canvas[:, :] = bg
        closed = ndimage.binary_closing(edge.bits, structure=np.ones((7, 7), dtype=bool))
        filled = ndimage.binary_fill_holes(closed)
        if self.pseudo_dilate > 0:
            filled = ndimage.maximum_filter(
                filled, size=2 * self.pseudo_dilate + 1, mode="constant", cval=False
            )
        canvas[filled] = _SUBJECT_COLOR
        return RasterImage(canvas)

    def inpaint(self, image: RasterImage, mask: BinaryMask, prompt: str,
                seed: int) -> RasterImage:
        rgb = image.rgb().copy()
        outside = ~mask.bits
        if outside.any():
            fill = np.round(rgb[outside].mean(axis=0)).astype(np.uint8)
        else:
            fill = np.array([127, 127, 127], dtype=np.uint8)
        rgb[mask.bits] = fill
        return RasterImage(rgb)

    def img2img(self, image: RasterImage, prompt: str, strength: float,
                seed: int) -> RasterImage:
        if self.refiner_mode == "identity":
            return RasterImage(image.rgb().copy())
        # mild deterministic shift so "refinement changed the image" is testable
        shift = int(round(8 * strength))
        rgb = image.rgb().astype(np.int16)
        return RasterImage(np.clip(rgb + shift, 0, 255).astype(np.uint8))


ChatFn = Callable[[dict], str]


def default_chat_scripts(question_ids, analyzer_policy: str = "always_pass",
                         analyzer_k: int = 1) -> dict[str, ChatFn]:
    return {
        "narrator": narrator_reply,
        "thinker": thinker_reply,
        "ranker": ranker_reply,
        "analyzer": AnalyzerScript(question_ids, analyzer_policy, analyzer_k),
    }


@dataclass
class MockAgents:
    """In-process server for the full wire protocol."""

    chat_scripts: dict[str, ChatFn]
    image_backend: MockImageBackend = field(default_factory=MockImageBackend)
    roles: tuple[str, ...] = ROLES

    def handle(self, path: str, body: dict) -> tuple[int, dict]:
        if path == HEALTH_PATH:
            return 200, {"status": "ok", "roles": list(self.roles)}
        if path == CHAT_PATH:
            role = body.get("role")
            if role not in self.chat_scripts:
                return 422, {"detail": f"role {role!r} not bound to a chat backend"}
            return 200, {"text": self.chat_scripts[role](body)}
        if path == IMAGE_PATH:
            return self._handle_image(body)
        return 422, {"detail": f"unknown path {path}"}

    def _handle_image(self, body: dict) -> tuple[int, dict]:
        task = body.get("task")
        images = {
            name: base64.b64decode(b64) for name, b64 in body.get("images", {}).items()
        }
        seed = int(body.get("seed", 0))
        prompt = body.get("prompt", "")
        backend = self.image_backend
        required = {"segment": ("image",), "canny2img": ("edge",),
                    "inpaint": ("image", "mask"), "img2img": ("image",)}
        for name in required.get(task, ()):
            if name not in images:
                return 422, {"detail": f"task {task!r} requires image {name!r}"}
        if task == "segment":
            mask = backend.segment(decode_png(images["image"]))
            return 200, {"mask_b64": base64.b64encode(encode_mask_png(mask)).decode("ascii")}
        if task == "canny2img":
            out = backend.canny2img(decode_mask_png(images["edge"]), prompt, seed)
        elif task == "inpaint":
            out = backend.inpaint(
                decode_png(images["image"]), decode_mask_png(images["mask"]), prompt, seed
            )
        elif task == "img2img":
            out = backend.img2img(
                decode_png(images["image"]), prompt, float(body.get("strength", 0.0)), seed
            )
        else:
            return 422, {"detail": f"unknown task {task!r}"}
        return 200, {"image_b64": base64.b64encode(encode_png(out)).decode("ascii")}


@dataclass
class MockTransport:
    """Transport adapter over MockAgents; latency reported as 0 so replayed
    runs serialize byte-identically."""

    agents: MockAgents
    fail_first: int = 0  # simulate transient 503s for retry tests
    _failures: int = 0

    def post(self, endpoint, path: str, body: dict) -> tuple[int, dict, float]:
        if self._failures < self.fail_first:
            self._failures += 1
            return 503, {"detail": "simulated outage"}, 0.0
        status, payload = self.agents.handle(path, body)
        return status, payload, 0.0


def build_mock_transport(question_ids, analyzer_policy: str = "always_pass",
                         analyzer_k: int = 1, pseudo_dilate: int = 6,
                         refiner_mode: str = "identity") -> MockTransport:
    """Fresh, fully scripted mock stack serving all eight roles."""
    return MockTransport(
        MockAgents(
            chat_scripts=default_chat_scripts(question_ids, analyzer_policy, analyzer_k),
            image_backend=MockImageBackend(pseudo_dilate=pseudo_dilate,
                                           refiner_mode=refiner_mode),
        )
    )


def failing_transport():
    """Transport that always raises, for retry-exhaustion tests."""

    class _Failing:
        def post(self, endpoint, path, body):
            raise TransportError("wire down")

    return _Failing()
