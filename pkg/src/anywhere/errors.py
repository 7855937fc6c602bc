"""Exception taxonomy shared by every pipeline module.

Errors raised inside a pipeline stage carry a ``stage`` attribute so the
orchestrator can record which stage aborted a run.
"""
from __future__ import annotations


class AnywhereError(Exception):
    """Base class for all pipeline errors."""

    stage: str | None = None

    def tagged(self, stage: str) -> "AnywhereError":
        self.stage = stage
        return self


class MissingAlphaError(AnywhereError):
    """An operation required an RGBA image but got one without alpha."""


class DimensionMismatchError(AnywhereError):
    """Two rasters that must share dimensions do not."""


class InvalidThresholdsError(AnywhereError):
    """Edge-detector thresholds violate low <= high."""


class TransportError(AnywhereError):
    """An agent call failed at the transport level after all retries."""


class SchemaError(AnywhereError):
    """An agent reply failed structured validation after the repair budget.

    ``raw_text`` holds the last reply so the run report can preserve it.
    """

    def __init__(self, message: str, raw_text: str | None = None):
        super().__init__(message)
        self.raw_text = raw_text


class PayloadError(AnywhereError):
    """An image-task request or reply violates the wire contract."""


class ConfigError(AnywhereError):
    """A configuration file failed validation; message names the field."""
