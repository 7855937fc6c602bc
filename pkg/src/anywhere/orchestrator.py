"""Pipeline state machine: one run turns a foreground PNG into a completed
image plus a machine-readable report, looping through prompt generation,
image generation, and outcome analysis until accepted or out of iterations.
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .agents import AgentClient
from .agents.schemas import SchemaRegistry
from .agents.transport import HttpTransport, Transport
from .config import PipelineConfig
from .edges import canny_edges
from .errors import AnywhereError
from .image_generation import (
    compose_and_refine,
    detect_over_imagination,
    generate_template,
    repaint_template,
    scaled_dilate_radius,
    segment_pseudo_foreground,
)
from .mask_ops import binarize_alpha
from .outcome_analyzer import (
    QUESTION_IDS,
    Accept,
    Exhausted,
    Regenerate,
    analyze_candidate,
    decide,
)
from .prompt_generation import (
    brainstorm_scenes,
    narrate_foreground,
    rank_scenes,
    select_and_assemble,
)
from .raster import decode_png, encode_mask_png, encode_png, letterbox

log = logging.getLogger(__name__)

TERMINATION_ACCEPTED = "accepted"
TERMINATION_EXHAUSTED = "exhausted"


@dataclass
class RunReport:
    run_id: str
    input_digest: str
    seed: int
    iterations: list[dict] = field(default_factory=list)
    termination: str = ""
    selected_iteration: int | None = None
    foreground_description: dict | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "foreground_description": self.foreground_description,
            "iterations": self.iterations,
            "termination": self.termination,
            "selected_iteration": self.selected_iteration,
        }

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, compact separators, floats
        pre-rounded to 6 decimals, so golden tests compare bytes."""
        return json.dumps(_round_floats(self.to_dict()), sort_keys=True,
                          separators=(",", ":"), ensure_ascii=False)


def _round_floats(value):
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_round_floats(v) for v in value]
    return value


def build_client(config: PipelineConfig, transport: Transport | None = None) -> AgentClient:
    schemas = SchemaRegistry(
        n_scenes=config.n_scenes,
        question_ids=QUESTION_IDS,
        allow_aesthetic=True,
    )
    return AgentClient(
        transport=transport or HttpTransport(),
        endpoints=config.endpoints,
        schemas=schemas,
        max_json_repairs=config.max_json_repairs,
        backoff_base=config.retry_backoff,
    )


def run_pipeline(foreground_png: bytes, config: PipelineConfig,
                 transport: Transport | None = None) -> RunReport:
    """Execute one full feedback-loop run and persist artifacts + report."""
    config.validate()
    input_digest = hashlib.sha256(foreground_png).hexdigest()
    run_id = hashlib.sha256(
        foreground_png + b"|" + str(config.seed).encode()
    ).hexdigest()[:12]
    report = RunReport(run_id=run_id, input_digest=input_digest, seed=config.seed)

    run_dir = Path(config.artifact_dir) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)

    client = build_client(config, transport)
    margin = scaled_dilate_radius(config.resolution, config.dilate_radius)

    try:
        foreground = letterbox(decode_png(foreground_png), config.resolution)
        fg_mask = binarize_alpha(foreground, config.alpha_threshold)
        (run_dir / "foreground.png").write_bytes(encode_png(foreground))

        desc = None
        feedback = ""
        best = None  # (passed_count, iteration_index)

        for iteration in range(1, config.max_iterations + 1):
            iter_seed = config.seed + (iteration - 1)
            iter_dir = run_dir / f"iter{iteration}"
            iter_dir.mkdir(exist_ok=True)
            stages: list[str] = []
            artifacts: dict[str, str] = {}
            log_start = len(client.call_log)

            def save(stage: str, data: bytes) -> None:
                path = iter_dir / f"{stage}.png"
                path.write_bytes(data)
                artifacts[stage] = str(path.relative_to(run_dir))

            if desc is None:
                desc = narrate_foreground(client, foreground, seed=iter_seed)
                report.foreground_description = {
                    "description": desc.description,
                    "name": desc.object_name,
                    "viewpoint": desc.viewpoint,
                }
                stages.append("narrate")

            scenes = brainstorm_scenes(client, desc, feedback=feedback, seed=iter_seed)
            stages.append("brainstorm")
            ranking = rank_scenes(client, desc, scenes, seed=iter_seed)
            stages.append("rank")
            prompt = select_and_assemble(scenes, ranking, desc)
            stages.append("select")

            edge = canny_edges(foreground, config.canny_low, config.canny_high)
            save("edge", encode_mask_png(edge))
            stages.append("edge")

            template = generate_template(client, edge, prompt, iter_seed,
                                         config.resolution)
            save("template", encode_png(template.image))
            stages.append("template")

            template = segment_pseudo_foreground(client, template, iter_seed)
            save("pseudo_mask", encode_mask_png(template.pseudo_mask))
            stages.append("segment")

            detection = detect_over_imagination(fg_mask, template.pseudo_mask,
                                                tau=config.tau, margin_radius=margin)
            stages.append("detect")

            if detection.triggered:
                save("repaint_mask", encode_mask_png(detection.repaint_mask))
                template = repaint_template(client, template, detection, prompt,
                                            desc.object_name, iter_seed)
                save("template_repainted", encode_png(template.image))
                stages.append("repaint")

            composite, candidate = compose_and_refine(
                client, foreground, template, prompt, iter_seed,
                refine_strength=config.refine_strength, iteration=iteration,
            )
            save("composite", encode_png(composite))
            stages.append("composite")
            save("candidate", encode_png(candidate.image))
            stages.append("refine")

            analysis = analyze_candidate(
                client, candidate.image, desc,
                request_aesthetic=config.request_aesthetic,
                aesthetic_floor=config.aesthetic_floor, seed=iter_seed,
            )
            stages.append("analyze")

            decision = decide(analysis, iteration, config.max_iterations)
            stages.append("decide")

            stats = detection.stats
            report.iterations.append({
                "index": iteration,
                "seed": iter_seed,
                "stages": stages,
                "final_prompt": {"scene_text": prompt.scene_text,
                                 "assembled": prompt.assembled},
                "scene_set": list(scenes.scenes),
                "feedback_used": scenes.generation_feedback,
                "ranking": list(ranking.ranks),
                "overlap_stats": {
                    "fg_area": stats.fg_area,
                    "pseudo_area": stats.pseudo_area,
                    "intersection_area": stats.intersection_area,
                    "excess_area": stats.excess_area,
                    "excess_ratio": stats.excess_ratio,
                },
                "detection_triggered": detection.triggered,
                "analysis_report": {
                    "answers": dict(analysis.answers),
                    "aesthetic_estimate": analysis.aesthetic_estimate,
                    "feedback_text": analysis.feedback_text,
                    "passed": analysis.passed,
                },
                "artifact_paths": artifacts,
                "agent_call_log": [
                    {"role": rec.role, "path": rec.path, "attempts": rec.attempts,
                     "latency_ms": rec.latency_ms, "seed": rec.seed,
                     "stage": rec.stage}
                    for rec in client.call_log[log_start:]
                ],
            })

            # best-so-far: most passed mandatory questions, ties to latest
            score = analysis.passed_count
            if best is None or score >= best[0]:
                best = (score, iteration)

            if isinstance(decision, Accept):
                report.termination = TERMINATION_ACCEPTED
                report.selected_iteration = iteration
                break
            if isinstance(decision, Exhausted):
                report.termination = TERMINATION_EXHAUSTED
                report.selected_iteration = best[1]
                break
            assert isinstance(decision, Regenerate)
            feedback = decision.feedback

    except AnywhereError as err:
        stage = err.stage or "unknown"
        log.error("run %s aborted at stage %s: %s", run_id, stage, err)
        report.termination = f"error:{stage}"
        report.selected_iteration = None

    (run_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    return report


@dataclass
class BatchResult:
    summary: dict
    reports: list[RunReport]


def run_batch(inputs: list[tuple[str, bytes]], config: PipelineConfig,
              transport_factory: Callable[[], Transport],
              runs_per_input: int = 4, parallel: int = 1) -> BatchResult:
    """Run every input ``runs_per_input`` times with consecutive seeds.

    Each run gets a fresh transport so scripted mock state never leaks
    between runs; results are order-independent by construction.
    """
    jobs = []
    for name, data in inputs:
        for offset in range(runs_per_input):
            jobs.append((name, data, config.seed + offset))

    def execute(job):
        name, data, seed = job
        run_config = PipelineConfig(**{**config.__dict__, "seed": seed})
        try:
            run_report = run_pipeline(data, run_config, transport=transport_factory())
            return name, seed, run_report, None
        except Exception as exc:  # per-file failures recorded, batch continues
            log.error("batch run for %s (seed %d) failed: %s", name, seed, exc)
            return name, seed, None, str(exc)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(execute, jobs))
    else:
        results = [execute(job) for job in jobs]

    runs = []
    reports = []
    errors = 0
    iteration_counts = []
    for name, seed, run_report, error in results:
        if run_report is None:
            errors += 1
            runs.append({"input": name, "seed": seed, "error": error})
            continue
        reports.append(run_report)
        iteration_counts.append(len(run_report.iterations))
        runs.append({
            "input": name,
            "seed": seed,
            "run_id": run_report.run_id,
            "termination": run_report.termination,
            "iterations": len(run_report.iterations),
            "selected_iteration": run_report.selected_iteration,
        })
    accepted = sum(1 for r in reports if r.termination == TERMINATION_ACCEPTED)
    exhausted = sum(1 for r in reports if r.termination == TERMINATION_EXHAUSTED)
    summary = {
        "total_runs": len(jobs),
        "accepted": accepted,
        "exhausted": exhausted,
        "errors": errors,
        "mean_iterations": (
            round(sum(iteration_counts) / len(iteration_counts), 6)
            if iteration_counts else 0.0
        ),
        "runs": sorted(runs, key=lambda r: (r["input"], r["seed"])),
    }
    return BatchResult(summary=summary, reports=reports)
