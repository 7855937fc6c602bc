"""Pipeline configuration: defaults, TOML parsing, and validation.

The config file is flat key/value TOML with one table per agent role:

    seed = 7
    max_iterations = 3

    [narrator]
    base_url = "http://localhost:8800"
    timeout = 60
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agents.protocol import ROLES, AgentEndpoint
from .errors import ConfigError


@dataclass
class PipelineConfig:
    endpoints: dict[str, AgentEndpoint]
    n_scenes: int = 5
    tau: float = 0.01
    dilate_radius: int = 8
    resolution: int = 1024
    refine_strength: float = 0.3
    max_iterations: int = 3
    max_json_repairs: int = 2
    alpha_threshold: int = 128
    canny_low: float = 100.0
    canny_high: float = 200.0
    seed: int = 0
    artifact_dir: str = "runs"
    retry_backoff: float = 0.5
    request_aesthetic: bool = False
    aesthetic_floor: int = 3

    def validate(self) -> "PipelineConfig":
        checks = [
            ("n_scenes", self.n_scenes >= 1, "must be >= 1"),
            ("tau", 0.0 <= self.tau < 1.0, "must be in [0,1)"),
            ("dilate_radius", self.dilate_radius >= 0, "must be >= 0"),
            ("resolution", self.resolution >= 8, "must be >= 8"),
            ("refine_strength", 0.0 <= self.refine_strength <= 1.0, "must be in [0,1]"),
            ("max_iterations", self.max_iterations >= 1, "must be >= 1"),
            ("max_json_repairs", self.max_json_repairs >= 0, "must be >= 0"),
            ("alpha_threshold", 0 <= self.alpha_threshold <= 255, "must be in [0,255]"),
            ("canny_low", self.canny_low >= 0, "must be >= 0"),
            ("canny_high", self.canny_high >= self.canny_low, "must be >= canny_low"),
            ("retry_backoff", self.retry_backoff >= 0, "must be >= 0"),
            ("aesthetic_floor", 1 <= self.aesthetic_floor <= 5, "must be in [1,5]"),
        ]
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(f"{name}: {message}")
        missing = [role for role in ROLES if role not in self.endpoints]
        if missing:
            raise ConfigError(f"endpoints: missing role(s) {', '.join(missing)}")
        return self


_SCALAR_FIELDS: dict[str, type] = {
    "n_scenes": int,
    "tau": float,
    "dilate_radius": int,
    "resolution": int,
    "refine_strength": float,
    "max_iterations": int,
    "max_json_repairs": int,
    "alpha_threshold": int,
    "canny_low": float,
    "canny_high": float,
    "seed": int,
    "artifact_dir": str,
    "retry_backoff": float,
    "request_aesthetic": bool,
    "aesthetic_floor": int,
}


def validate_config(raw_config_text: str, require_endpoints: bool = True) -> PipelineConfig:
    """Parse and validate a TOML config; messages name the offending field."""
    try:
        data = tomllib.loads(raw_config_text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: invalid TOML ({exc})") from exc

    kwargs: dict = {}
    for name, type_ in _SCALAR_FIELDS.items():
        if name in data:
            value = data.pop(name)
            if type_ is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, type_) or (type_ is int and isinstance(value, bool)):
                raise ConfigError(f"{name}: expected {type_.__name__}")
            kwargs[name] = value

    endpoints: dict[str, AgentEndpoint] = {}
    for key, value in data.items():
        if key not in ROLES:
            raise ConfigError(f"{key}: unknown config key")
        if not isinstance(value, dict) or "base_url" not in value:
            raise ConfigError(f"{key}: role table needs base_url")
        try:
            endpoints[key] = AgentEndpoint(
                role=key,
                base_url=str(value["base_url"]),
                timeout=float(value.get("timeout", 60.0)),
                max_retries=int(value.get("max_retries", 2)),
                auth_token=value.get("auth_token"),
            )
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    config = PipelineConfig(endpoints=endpoints, **kwargs)
    if require_endpoints:
        config.validate()
    else:
        # mock mode binds roles later; validate the numeric fields only
        full = PipelineConfig(**{**config.__dict__, "endpoints": _loopback_endpoints()})
        full.validate()
    return config


def _loopback_endpoints() -> dict[str, AgentEndpoint]:
    return {role: AgentEndpoint(role=role, base_url="mock://local") for role in ROLES}


def mock_endpoints() -> dict[str, AgentEndpoint]:
    """Endpoint table used when every role is served by the in-process mocks."""
    return _loopback_endpoints()
