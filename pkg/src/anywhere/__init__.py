"""Multi-agent orchestration engine for foreground-conditioned image
inpainting: prompt generation, edge-conditioned template generation,
over-imagination repair, compositing, refinement, and a bounded VLM
feedback loop — every model behind one wire protocol, every agent
replaceable by deterministic mocks."""

__version__ = "0.1.0"
