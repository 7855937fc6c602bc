from .client import AgentClient
from .protocol import (
    AgentEndpoint,
    ChatRequest,
    ImageTaskRequest,
    StructuredResponse,
    CHAT_PATH,
    IMAGE_PATH,
    HEALTH_PATH,
    ROLES,
    CHAT_ROLES,
    VISION_ROLES,
    IMAGE_ROLES,
)
from .schemas import SchemaRegistry, extract_json_object
from .transport import HttpTransport, Transport

__all__ = [
    "AgentClient",
    "AgentEndpoint",
    "ChatRequest",
    "ImageTaskRequest",
    "StructuredResponse",
    "SchemaRegistry",
    "extract_json_object",
    "HttpTransport",
    "Transport",
    "CHAT_PATH",
    "IMAGE_PATH",
    "HEALTH_PATH",
    "ROLES",
    "CHAT_ROLES",
    "VISION_ROLES",
    "IMAGE_ROLES",
]
