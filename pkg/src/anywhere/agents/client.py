"""Agent client: retries, JSON-repair loop, and reply decoding.

One client serves every role; the per-role endpoint decides where requests
go. Transport failures (exceptions and 5xx) are retried with exponential
backoff; schema-invalid chat replies are re-asked with a corrective
instruction up to the repair budget.
"""
from __future__ import annotations

import base64
import logging
import time
from dataclasses import dataclass, field

from ..errors import PayloadError, SchemaError, TransportError
from ..raster import BinaryMask, RasterImage, decode_mask_png, decode_png
from .protocol import (
    CHAT_PATH,
    CHAT_ROLES,
    IMAGE_PATH,
    VISION_ROLES,
    AgentEndpoint,
    ChatRequest,
    ImageTaskRequest,
    StructuredResponse,
)
from .schemas import SchemaRegistry
from .transport import Transport

log = logging.getLogger(__name__)

REPAIR_INSTRUCTION = (
    "Your previous reply was not valid JSON for the required schema; "
    "reply with ONLY the JSON object."
)


@dataclass
class CallRecord:
    """One transport round-trip, kept for the run report."""

    role: str
    path: str
    attempts: int
    latency_ms: float
    seed: int | None = None
    stage: str | None = None


@dataclass
class AgentClient:
    transport: Transport
    endpoints: dict[str, AgentEndpoint]
    schemas: SchemaRegistry
    max_json_repairs: int = 2
    backoff_base: float = 0.5
    call_log: list[CallRecord] = field(default_factory=list)

    def endpoint(self, role: str) -> AgentEndpoint:
        try:
            return self.endpoints[role]
        except KeyError:
            raise TransportError(f"no endpoint configured for role {role!r}") from None

    # -- transport with retry -------------------------------------------

    def _post_with_retry(self, endpoint: AgentEndpoint, path: str, body: dict
                         ) -> tuple[dict, float]:
        last_error: Exception | None = None
        total_latency = 0.0
        for attempt in range(endpoint.max_retries + 1):
            if attempt > 0:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                status, payload, latency = self.transport.post(endpoint, path, body)
            except TransportError as exc:
                last_error = exc
                continue
            total_latency += latency
            if status == 200:
                return payload, total_latency
            if status == 422:
                raise PayloadError(
                    f"{endpoint.role} rejected request: {payload.get('detail', status)}"
                )
            last_error = TransportError(f"{endpoint.role} returned status {status}")
        raise TransportError(
            f"{endpoint.role} unreachable after {endpoint.max_retries + 1} attempts: {last_error}"
        )

    # -- chat ------------------------------------------------------------

    def call_chat(self, role: str, request: ChatRequest, stage: str | None = None
                  ) -> StructuredResponse:
        if role not in CHAT_ROLES:
            raise PayloadError(f"role {role!r} is not a chat role")
        if (request.image_png is not None) != (role in VISION_ROLES):
            raise PayloadError(
                f"image must be present iff the role is vision-capable (role={role})"
            )
        endpoint = self.endpoint(role)
        body = request.to_wire(role)
        user_prompt = request.user_prompt
        attempts = 0
        total_latency = 0.0
        last_raw = ""
        while attempts <= self.max_json_repairs:
            attempts += 1
            payload, latency = self._post_with_retry(endpoint, CHAT_PATH, body)
            total_latency += latency
            last_raw = payload.get("text", "")
            try:
                parsed = self.schemas.validate_json(last_raw, request.response_schema_id)
            except SchemaError as err:
                log.debug("schema-invalid reply from %s (attempt %d): %s", role, attempts, err)
                user_prompt = request.user_prompt + "\n\n" + REPAIR_INSTRUCTION
                body = dict(body, user_prompt=user_prompt)
                continue
            self.call_log.append(CallRecord(role, CHAT_PATH, attempts,
                                            round(total_latency, 3), request.seed, stage))
            return StructuredResponse(raw_text=last_raw, parsed=parsed,
                                      attempts_used=attempts)
        raise SchemaError(
            f"{role} reply failed {request.response_schema_id} validation after "
            f"{attempts} attempts",
            raw_text=last_raw,
        )

    # -- image tasks -----------------------------------------------------

    def call_image_task(self, role: str, request: ImageTaskRequest,
                        stage: str | None = None) -> RasterImage | BinaryMask:
        request.validate()
        endpoint = self.endpoint(role)
        body = request.to_wire(role)
        payload, latency = self._post_with_retry(endpoint, IMAGE_PATH, body)
        self.call_log.append(CallRecord(role, IMAGE_PATH, 1,
                                        round(latency, 3), request.seed, stage))
        if request.task == "segment":
            if "mask_b64" not in payload:
                raise PayloadError(f"{role} segment reply lacks mask_b64")
            return decode_mask_png(base64.b64decode(payload["mask_b64"]))
        if "image_b64" not in payload:
            raise PayloadError(f"{role} {request.task} reply lacks image_b64")
        return decode_png(base64.b64decode(payload["image_b64"]))
