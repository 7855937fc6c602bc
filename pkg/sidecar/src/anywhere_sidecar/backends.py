"""Built-in procedural backends: deterministic, CPU-only stand-ins for the
real models, keyed by request seed. They answer the same contracts a hosted
VLM or diffusion checkpoint would, which lets the full pipeline run end to
end on any machine while staying honest about not being generative models.
"""
from __future__ import annotations

import hashlib
import io
import json
import re

import cv2
import numpy as np
from PIL import Image


def _digest(*parts) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x00")
    return h.digest()


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        if im.mode not in ("RGB", "RGBA", "L"):
            im = im.convert("RGBA")
        return np.asarray(im).copy()


def encode_png(pixels: np.ndarray, mode: str | None = None) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(pixels, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def _rgb(pixels: np.ndarray) -> np.ndarray:
    if pixels.ndim == 2:
        return np.stack([pixels] * 3, axis=2)
    if pixels.shape[2] == 4:
        alpha = pixels[:, :, 3:4].astype(np.float64) / 255.0
        rgb = pixels[:, :, :3].astype(np.float64)
        return np.clip(rgb * alpha + 255.0 * (1 - alpha), 0, 255).astype(np.uint8)
    return pixels[:, :, :3]


# ---------------------------------------------------------------- chat ----

SCENE_NOUNS = ("meadow", "workshop", "terrace", "library", "shoreline",
               "courtyard", "studio", "market", "garden", "loft")
SCENE_MOODS = ("sunlit", "misty", "rain-washed", "candlelit", "windswept",
               "snow-dusted", "dusky", "bright")


class BuiltinChatBackend:
    """Schema-driven replies: the request names its answer model, and the
    instruction text carries the JSON template, so valid output needs no
    knowledge of the engine beyond the wire contract."""

    def reply(self, body: dict) -> str:
        schema_id = body.get("response_schema_id", "")
        prompt = body.get("user_prompt", "")
        seed = body.get("seed", 0)
        if schema_id == "foreground_description":
            return self._describe(body)
        if schema_id == "scene_set":
            return self._scenes(prompt, seed)
        if schema_id == "scene_ranking":
            return self._ranking(prompt, seed)
        if schema_id == "analysis_answers":
            return self._answers(prompt)
        # unknown schema: echo an empty object and let the client re-ask
        return "{}"

    def _describe(self, body: dict) -> str:
        image_b64 = body.get("image_b64")
        hue_name = "neutral"
        if image_b64:
            import base64

            pixels = _rgb(decode_png(base64.b64decode(image_b64)))
            mean = pixels.reshape(-1, 3).mean(axis=0)
            channel = int(np.argmax(mean))
            hue_name = ("reddish", "greenish", "bluish")[channel]
        name = f"{hue_name} object"
        return json.dumps({
            "description": f"a {hue_name} foreground object on a transparent backdrop",
            "name": name,
            "viewpoint": "horizontal view",
        })

    def _scenes(self, prompt: str, seed) -> str:
        placeholders = re.findall(r"<scene (\d+)>", prompt)
        count = max((int(p) for p in placeholders), default=5)
        digest = _digest("scenes", prompt, seed)
        scenes = []
        for i in range(count):
            mood = SCENE_MOODS[digest[2 * i] % len(SCENE_MOODS)]
            noun = SCENE_NOUNS[(digest[2 * i + 1] + i) % len(SCENE_NOUNS)]
            scenes.append(f"a {mood} {noun}, scene {i + 1}")
        return json.dumps({"scenes": scenes})

    def _ranking(self, prompt: str, seed) -> str:
        match = re.search(r"permutation of 1\.\.(\d+)", prompt)
        count = int(match.group(1)) if match else 5
        rng = np.random.default_rng(int.from_bytes(_digest("rank", prompt, seed)[:8], "big"))
        ranks = rng.permutation(count) + 1
        return json.dumps({"ranks": ranks.tolist()})

    def _answers(self, prompt: str) -> str:
        # the instruction embeds the answer model; mine its keys
        keys = []
        for key in re.findall(r'"([a-z_]+)":\s*"yes\|no', prompt):
            if key not in keys:
                keys.append(key)
        if not keys:
            keys = ["common_context", "placed_normally"]
        answers: dict = {key: "yes" for key in keys}
        if '"aesthetic"' in prompt:
            answers["aesthetic"] = 4
        return json.dumps(answers)


# --------------------------------------------------------------- image ----


class BuiltinImageBackend:
    """Procedural diffusion stand-ins. Every task is a pure function of its
    inputs and the seed, so replays are reproducible on one machine."""

    def segment(self, image: np.ndarray, seed: int) -> np.ndarray:
        rgb = _rgb(image).astype(np.float64)
        h, w = rgb.shape[:2]
        border = np.concatenate([
            rgb[0, :], rgb[-1, :], rgb[:, 0], rgb[:, -1]
        ])
        background = border.mean(axis=0)
        distance = np.sqrt(((rgb - background) ** 2).sum(axis=2))
        threshold = max(30.0, distance.mean() + distance.std())
        mask = (distance > threshold).astype(np.uint8)
        kernel = np.ones((3, 3), np.uint8)
        mask = cv2.morphologyEx(mask, cv2.MORPH_OPEN, kernel)
        mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)
        return mask.astype(bool)

    def canny2img(self, edge: np.ndarray, prompt: str, seed: int) -> np.ndarray:
        edge_bits = edge > 0 if edge.ndim == 2 else _rgb(edge).mean(axis=2) > 127
        h, w = edge_bits.shape
        rng = np.random.default_rng(
            int.from_bytes(_digest("canny2img", prompt, seed)[:8], "big"))
        # smooth color-field background keyed by prompt + seed
        base = rng.integers(40, 216, size=3)
        yy, xx = np.mgrid[0:h, 0:w]
        waves = (np.sin(yy / max(8, h // 8)) + np.cos(xx / max(8, w // 8))) * 20
        canvas = np.clip(base[None, None, :] + waves[:, :, None]
                         + rng.normal(0, 4, (h, w, 3)), 0, 255).astype(np.uint8)
        canvas = cv2.GaussianBlur(canvas, (5, 5), 0)
        # respect the condition: close the edge contour and shade its interior
        closed = cv2.morphologyEx(edge_bits.astype(np.uint8), cv2.MORPH_CLOSE,
                                  np.ones((7, 7), np.uint8))
        filled = closed.copy()
        flood = np.zeros((h + 2, w + 2), np.uint8)
        cv2.floodFill(filled, flood, (0, 0), 1)
        interior = (closed | (1 - filled)).astype(bool)
        subject_color = np.clip(255 - base, 0, 255).astype(np.uint8)
        canvas[interior] = subject_color
        canvas[edge_bits] = np.clip(subject_color.astype(int) - 30, 0, 255)
        return canvas

    def inpaint(self, image: np.ndarray, mask: np.ndarray, prompt: str,
                seed: int) -> np.ndarray:
        rgb = np.ascontiguousarray(_rgb(image))
        mask_u8 = (mask > 0).astype(np.uint8) * 255 if mask.ndim == 2 else \
            (_rgb(mask).mean(axis=2) > 127).astype(np.uint8) * 255
        return cv2.inpaint(rgb, mask_u8, 3, cv2.INPAINT_TELEA)

    def img2img(self, image: np.ndarray, prompt: str, strength: float,
                seed: int) -> np.ndarray:
        rgb = _rgb(image).astype(np.float64)
        softened = cv2.GaussianBlur(rgb, (3, 3), 0)
        out = rgb * (1.0 - strength) + softened * strength
        return np.clip(out, 0, 255).astype(np.uint8)
