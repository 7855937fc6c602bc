"""Versioned wire-protocol conformance vectors.

Each vector is a JSON file pairing a canned request with shape expectations
for the reply. The pack is the single source of truth for what any server
behind the agent protocol must accept and return; the engine's mocks and the
model sidecar are both checked against it.

Only shapes are asserted (status, fields, decodability, dimensions), never
pixel or text content, so generative backends stay free to vary.
"""
from __future__ import annotations

import base64
import io
import json
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from PIL import Image

Handler = Callable[[str, dict], tuple[int, dict]]
"""(path, request_body) -> (status_code, response_body)."""


def load_vectors() -> list[dict]:
    root = resources.files("anywhere.conformance").joinpath("vectors")
    vectors = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            vectors.append(json.loads(entry.read_text("utf-8")))
    return vectors


@dataclass
class VectorResult:
    vector_id: str
    passed: bool
    detail: str = ""


def _png_dims(b64: str) -> tuple[int, int]:
    data = base64.b64decode(b64)
    with Image.open(io.BytesIO(data)) as im:
        return im.width, im.height


def check_vector(vector: dict, handler: Handler) -> VectorResult:
    """Replay one vector and validate the reply's shape."""
    vid = vector["id"]
    expect = vector["expect"]
    try:
        status, body = handler(vector["path"], vector.get("request", {}))
    except Exception as exc:
        return VectorResult(vid, False, f"handler raised {exc!r}")

    if status != expect["status"]:
        return VectorResult(vid, False, f"status {status} != {expect['status']}")
    for field in expect.get("string_fields", []):
        if not isinstance(body.get(field), str) or not body[field]:
            return VectorResult(vid, False, f"field {field!r} missing or empty")
    for field in expect.get("list_fields", []):
        if not isinstance(body.get(field), list):
            return VectorResult(vid, False, f"field {field!r} missing or not a list")
    for field in expect.get("png_fields", []):
        try:
            width, height = _png_dims(body[field])
        except Exception as exc:
            return VectorResult(vid, False, f"field {field!r} not decodable PNG: {exc}")
        dims = expect.get("png_dims")
        if dims and [width, height] != dims:
            return VectorResult(vid, False, f"{field}: {width}x{height} != {dims}")
    roles = expect.get("roles_include")
    if roles:
        advertised = body.get("roles", [])
        missing = [r for r in roles if r not in advertised]
        if missing:
            return VectorResult(vid, False, f"health roles missing {missing}")
    return VectorResult(vid, True)


def check_all(handler: Handler, vectors: list[dict] | None = None) -> list[VectorResult]:
    return [check_vector(v, handler) for v in vectors or load_vectors()]
