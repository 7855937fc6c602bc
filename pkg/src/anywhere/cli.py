"""Command-line entry point: single runs, batches, config validation,
report inspection, and a no-network selftest.

Exit codes: 0 accepted/ok, 1 error, 2 exhausted, 64 usage error.
Data goes to stdout, logs to stderr.
"""
from __future__ import annotations

import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import click

from .agents.mocks import build_mock_transport
from .config import PipelineConfig, mock_endpoints, validate_config
from .errors import AnywhereError, ConfigError
from .fixtures import make_foreground_png
from .orchestrator import (
    TERMINATION_ACCEPTED,
    TERMINATION_EXHAUSTED,
    run_batch,
    run_pipeline,
)
from .outcome_analyzer import QUESTION_IDS

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2
EXIT_USAGE = 64

CONFIG_ENV_VAR = "ANYWHERE_CONFIG"

log = logging.getLogger("anywhere")


def _load_config(config_path: str | None, mock: bool, out: str | None,
                 seed: int | None) -> PipelineConfig:
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR)
    if config_path is not None:
        text = Path(config_path).read_text(encoding="utf-8")
        config = validate_config(text, require_endpoints=not mock)
    elif mock:
        config = PipelineConfig(endpoints={})
    else:
        raise click.UsageError("--config (or ANYWHERE_CONFIG) is required without --mock")
    if mock and not config.endpoints:
        config.endpoints = mock_endpoints()
    if out is not None:
        config.artifact_dir = out
    if seed is not None:
        config.seed = seed
    return config


def _mock_transport_factory(analyzer_policy: str = "always_pass", analyzer_k: int = 1):
    return lambda: build_mock_transport(QUESTION_IDS, analyzer_policy, analyzer_k)


def _termination_exit(termination: str) -> int:
    if termination == TERMINATION_ACCEPTED:
        return EXIT_OK
    if termination == TERMINATION_EXHAUSTED:
        return EXIT_EXHAUSTED
    return EXIT_ERROR


@click.group()
def cli() -> None:
    """Foreground-conditioned inpainting pipeline."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command("run")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
@click.option("--mock", is_flag=True, help="Serve all roles from built-in mocks.")
@click.option("--analyzer-policy", default="always_pass",
              type=click.Choice(["always_pass", "always_fail", "pass_on_call"]),
              help="Mock analyzer behavior (mock mode only).")
@click.option("--analyzer-k", default=2, type=int,
              help="First passing analysis call for pass_on_call.")
def cmd_run(input_path, config_path, out, seed, mock, analyzer_policy, analyzer_k):
    """Run the pipeline once on a foreground PNG."""
    config = _load_config(config_path, mock, out, seed)
    data = Path(input_path).read_bytes()
    transport = None
    if mock:
        transport = _mock_transport_factory(analyzer_policy, analyzer_k)()
    report = run_pipeline(data, config, transport=transport)
    click.echo(f"run_id {report.run_id}")
    click.echo(f"termination {report.termination}")
    sys.exit(_termination_exit(report.termination))


@cli.command("batch")
@click.option("--input-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
@click.option("--parallel", default=1, type=int)
@click.option("--runs-per-input", default=4, type=int)
@click.option("--mock", is_flag=True)
@click.option("--analyzer-policy", default="always_pass",
              type=click.Choice(["always_pass", "always_fail", "pass_on_call"]))
@click.option("--analyzer-k", default=2, type=int)
def cmd_batch(input_dir, config_path, out, seed, parallel, runs_per_input, mock,
              analyzer_policy, analyzer_k):
    """Run every PNG in a directory with consecutive seeds per input."""
    files = sorted(Path(input_dir).glob("*.png"))
    if not files:
        raise click.UsageError(f"no PNG inputs in {input_dir}")
    config = _load_config(config_path, mock, out, seed)
    inputs = [(f.name, f.read_bytes()) for f in files]
    if mock:
        factory = _mock_transport_factory(analyzer_policy, analyzer_k)
    else:
        factory = lambda: None  # run_pipeline falls back to HTTP
    result = run_batch(inputs, config, transport_factory=factory,
                       runs_per_input=runs_per_input, parallel=max(1, parallel))
    summary_path = Path(config.artifact_dir) / "summary.json"
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    summary_path.write_text(
        json.dumps(result.summary, sort_keys=True, indent=2), encoding="utf-8"
    )
    click.echo(f"summary {summary_path}")
    click.echo(
        "runs {total_runs} accepted {accepted} exhausted {exhausted} errors {errors}".format(
            **result.summary
        )
    )
    sys.exit(EXIT_ERROR if result.summary["errors"] else EXIT_OK)


@cli.command("validate-config")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def cmd_validate_config(config_path):
    """Parse and validate a config file."""
    text = Path(config_path).read_text(encoding="utf-8")
    validate_config(text)
    click.echo("config ok")


@cli.command("inspect")
@click.option("--report", "report_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def cmd_inspect(report_path):
    """Print a per-iteration table for a run report."""
    try:
        report = json.loads(Path(report_path).read_text(encoding="utf-8"))
        rows = []
        for it in report["iterations"]:
            flags = "over-imagination: repainted" if it["detection_triggered"] else "-"
            verdict = "pass" if it["analysis_report"]["passed"] else "fail"
            rows.append((
                str(it["index"]),
                f"{it['overlap_stats']['excess_ratio']:.4f}",
                flags,
                verdict,
                it["final_prompt"]["assembled"],
            ))
        termination = report["termination"]
        selected = report["selected_iteration"]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        click.echo(f"malformed report: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    click.echo("iter  excess  detection                    verdict  prompt")
    for row in rows:
        click.echo(f"{row[0]:<5} {row[1]:<7} {row[2]:<28} {row[3]:<8} {row[4]}")
    click.echo(f"termination {termination} selected_iteration {selected}")


@cli.command("selftest")
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--seed", default=7, type=int)
def cmd_selftest(out, seed):
    """Full-pipeline smoke test on built-in fixtures and mocks, run twice to
    prove byte-identical replays. No network."""
    workdir = Path(out) if out else Path(tempfile.mkdtemp(prefix="anywhere-selftest-"))
    data = make_foreground_png(0)
    reports = []
    for attempt in ("a", "b"):
        config = PipelineConfig(
            endpoints=mock_endpoints(),
            resolution=256,
            seed=seed,
            artifact_dir=str(workdir / attempt),
        )
        transport = _mock_transport_factory("pass_on_call", 2)()
        reports.append(run_pipeline(data, config, transport=transport))

    first, second = reports
    report_a = (workdir / "a" / first.run_id / "report.json").read_bytes()
    report_b = (workdir / "b" / second.run_id / "report.json").read_bytes()
    identical = report_a == report_b
    artifacts_a = sorted((workdir / "a" / first.run_id).rglob("*.png"))
    for path_a in artifacts_a:
        path_b = workdir / "b" / second.run_id / path_a.relative_to(workdir / "a" / first.run_id)
        if not path_b.exists() or path_a.read_bytes() != path_b.read_bytes():
            identical = False
            break

    click.echo(f"run_id {first.run_id}")
    click.echo(f"termination {first.termination}")
    click.echo(f"iterations {len(first.iterations)}")
    click.echo(f"deterministic {'yes' if identical else 'no'}")
    click.echo(f"artifacts {workdir}")
    ok = identical and first.termination == TERMINATION_ACCEPTED
    sys.exit(EXIT_OK if ok else EXIT_ERROR)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as err:
        click.echo(f"usage error: {err.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as err:
        err.show()
        return EXIT_ERROR
    except ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        return EXIT_ERROR
    except AnywhereError as err:
        click.echo(f"error: {err}", err=True)
        return EXIT_ERROR
    except SystemExit as err:
        return int(err.code or 0)
    except click.Abort:
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
