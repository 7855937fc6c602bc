"""HTTP transport for agent endpoints.

A Transport turns (endpoint, path, body) into (status, reply dict, latency).
The production transport speaks HTTP; tests and mock mode substitute an
in-process implementation with the same signature.
"""
from __future__ import annotations

from typing import Protocol

import requests

from ..errors import TransportError


class Transport(Protocol):
    def post(self, endpoint, path: str, body: dict) -> tuple[int, dict, float]:
        """Returns (status_code, reply_json, latency_ms)."""
        ...


class HttpTransport:
    """Plain requests-based transport; one shared session, thread-safe."""

    def __init__(self) -> None:
        self._session = requests.Session()

    def post(self, endpoint, path: str, body: dict) -> tuple[int, dict, float]:
        url = endpoint.base_url.rstrip("/") + path
        headers = {}
        if endpoint.auth_token:
            headers["Authorization"] = f"Bearer {endpoint.auth_token}"
        try:
            resp = self._session.post(url, json=body, headers=headers,
                                      timeout=endpoint.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"POST {url} failed: {exc}") from exc
        latency_ms = resp.elapsed.total_seconds() * 1000.0
        try:
            payload = resp.json()
        except ValueError:
            payload = {}
        return resp.status_code, payload, latency_ms
