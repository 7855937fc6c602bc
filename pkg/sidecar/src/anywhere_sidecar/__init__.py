"""Model sidecar: serves every pipeline agent role over the shared wire
protocol. Built-in procedural backends run on CPU with no model downloads;
real checkpoints or hosted providers can be bound per role in the config.
"""
from .config import SidecarConfig
from .app import create_app

__all__ = ["SidecarConfig", "create_app"]
