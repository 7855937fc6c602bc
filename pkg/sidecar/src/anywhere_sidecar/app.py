"""FastAPI application implementing the three-path agent wire protocol.

    POST /v1/chat    -> {"text": ...}
    POST /v1/image   -> {"image_b64": ...} or {"mask_b64": ...}
    GET  /v1/health  -> {"status": ..., "roles": [...], "timeout_s": ...}

200 success, 422 contract violation, 503 while backends are loading.
No other endpoints exist.
"""
from __future__ import annotations

import base64
import binascii
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import BuiltinChatBackend, BuiltinImageBackend, decode_png, encode_png
from .config import CHAT_ROLES, IMAGE_TASKS, TASK_ROLES, SidecarConfig

_REQUIRED_IMAGES = {
    "segment": ("image",),
    "canny2img": ("edge",),
    "inpaint": ("image", "mask"),
    "img2img": ("image",),
}
_PROMPT_REQUIRED = ("canny2img", "inpaint", "img2img")


def _reject(detail: str, status: int = 422) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": detail})


def create_app(config: SidecarConfig | None = None) -> FastAPI:
    config = (config or SidecarConfig()).validate()
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)

    chat_backend = BuiltinChatBackend()
    image_backend = BuiltinImageBackend()
    ready = threading.Event()
    ready.set()  # builtin backends need no load phase; adapters may clear this

    app.state.config = config
    app.state.ready = ready

    def _decode_field(b64: str, field: str):
        try:
            return decode_png(base64.b64decode(b64, validate=True))
        except (binascii.Error, ValueError, OSError) as exc:
            raise ValueError(f"{field}: not a decodable base64 PNG ({exc})")

    @app.get("/v1/health")
    def health():
        if not ready.is_set():
            return JSONResponse(status_code=503, content={"status": "loading",
                                                          "roles": []})
        return {"status": "ok", "roles": config.bound_roles,
                "timeout_s": config.request_timeout}

    @app.post("/v1/chat")
    async def chat(request: Request):
        if not ready.is_set():
            return _reject("backends loading", 503)
        body = await _body(request)
        if body is None:
            return _reject("request body must be a JSON object")
        role = body.get("role")
        if role not in CHAT_ROLES:
            return _reject(f"unknown chat role {role!r}")
        if role not in config.models:
            return _reject(f"role {role!r} not bound to a backend")
        if not isinstance(body.get("user_prompt"), str) or not body["user_prompt"]:
            return _reject("user_prompt must be a non-empty string")
        if "image_b64" in body:
            try:
                _decode_field(body["image_b64"], "image_b64")
            except ValueError as exc:
                return _reject(str(exc))
        return {"text": chat_backend.reply(body)}

    @app.post("/v1/image")
    async def image(request: Request):
        if not ready.is_set():
            return _reject("backends loading", 503)
        body = await _body(request)
        if body is None:
            return _reject("request body must be a JSON object")
        task = body.get("task")
        if task not in IMAGE_TASKS:
            return _reject(f"unknown image task {task!r}")
        if TASK_ROLES[task] not in config.models:
            return _reject(f"role {TASK_ROLES[task]!r} not bound to a backend")
        images_b64 = body.get("images")
        if not isinstance(images_b64, dict):
            return _reject("images must be an object of base64 PNGs")
        for name in _REQUIRED_IMAGES[task]:
            if name not in images_b64:
                return _reject(f"task {task!r} requires image {name!r}")
        if task in _PROMPT_REQUIRED and not body.get("prompt"):
            return _reject(f"task {task!r} requires a prompt")
        strength = body.get("strength")
        if task == "img2img":
            if not isinstance(strength, (int, float)) or not 0.0 <= strength <= 1.0:
                return _reject("img2img requires strength in [0,1]")
        seed = body.get("seed")
        if not isinstance(seed, int):
            return _reject("seed must be an integer")

        decoded = {}
        for name, b64 in images_b64.items():
            if len(b64) * 3 // 4 > config.max_payload_bytes:
                return _reject(f"image {name!r} exceeds payload limit")
            try:
                decoded[name] = _decode_field(b64, name)
            except ValueError as exc:
                return _reject(str(exc))

        prompt = body.get("prompt", "")
        if task == "segment":
            mask = image_backend.segment(decoded["image"], seed)
            png = encode_png(mask.astype("uint8") * 255, mode="L")
            return {"mask_b64": base64.b64encode(png).decode("ascii")}
        if task == "canny2img":
            out = image_backend.canny2img(decoded["edge"], prompt, seed)
        elif task == "inpaint":
            out = image_backend.inpaint(decoded["image"], decoded["mask"],
                                        prompt, seed)
        else:
            out = image_backend.img2img(decoded["image"], prompt,
                                        float(strength), seed)
        return {"image_b64": base64.b64encode(encode_png(out)).decode("ascii")}

    async def _body(request: Request):
        raw = await request.body()
        if len(raw) > config.max_payload_bytes:
            return None
        try:
            import json

            parsed = json.loads(raw.decode("utf-8") or "{}")
        except (ValueError, UnicodeDecodeError):
            return None
        return parsed if isinstance(parsed, dict) else None

    return app
