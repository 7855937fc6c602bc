"""End-to-end smoke: the orchestration engine drives a real sidecar over
HTTP for one full run. Shapes and stage bookkeeping are asserted; pixel
content is left to manual inspection by design."""
import json

from anywhere.agents.protocol import ROLES, AgentEndpoint
from anywhere.agents.transport import HttpTransport
from anywhere.config import PipelineConfig
from anywhere.fixtures import make_foreground_png
from anywhere.orchestrator import run_pipeline


def test_single_run_over_http(live_server, tmp_path):
    config = PipelineConfig(
        endpoints={role: AgentEndpoint(role=role, base_url=live_server)
                   for role in ROLES},
        resolution=64,
        max_iterations=1,
        seed=11,
        artifact_dir=str(tmp_path / "runs"),
    )
    report = run_pipeline(make_foreground_png(2), config,
                          transport=HttpTransport())

    assert report.termination in ("accepted", "exhausted")
    assert len(report.iterations) == 1
    iteration = report.iterations[0]
    required = ["narrate", "brainstorm", "rank", "select", "edge", "template",
                "segment", "detect", "composite", "refine", "analyze", "decide"]
    for stage in required:
        assert stage in iteration["stages"], stage
    assert len(iteration["scene_set"]) == 5
    assert sorted(iteration["ranking"]) == [1, 2, 3, 4, 5]
    assert report.foreground_description["name"]

    run_dir = tmp_path / "runs" / report.run_id
    saved = json.loads((run_dir / "report.json").read_text())
    assert saved["run_id"] == report.run_id
    for name, rel in iteration["artifact_paths"].items():
        assert (run_dir / rel).exists(), name
    # real latencies come from the HTTP round trip
    assert all(rec["latency_ms"] >= 0.0 for rec in iteration["agent_call_log"])
