"""Sidecar entry points: `serve` runs the server, `conformance-check`
replays the shared vector pack against a running instance."""
from __future__ import annotations

import sys

import click


@click.group()
def cli() -> None:
    """Agent-protocol model sidecar."""


@cli.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8800, type=int)
@click.option("--exclude-role", "excluded", multiple=True,
              help="Do not bind or advertise this role.")
def cmd_serve(host, port, excluded):
    """Serve all bound roles with the built-in backends."""
    import uvicorn

    from .app import create_app
    from .config import ROLES, SidecarConfig

    models = {r: "builtin" for r in ROLES if r not in excluded}
    config = SidecarConfig(host=host, port=port, models=models)
    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")


@cli.command("conformance-check")
@click.option("--url", required=True, help="Base URL of a running sidecar.")
def cmd_conformance_check(url):
    """Replay the shared conformance vectors over HTTP; exit 1 on any failure."""
    import requests

    from anywhere.conformance import check_all

    session = requests.Session()

    def handler(path: str, body: dict):
        if path.endswith("/health"):
            reply = session.get(url.rstrip("/") + path, timeout=30)
        else:
            reply = session.post(url.rstrip("/") + path, json=body, timeout=120)
        try:
            payload = reply.json()
        except ValueError:
            payload = {}
        return reply.status_code, payload

    results = check_all(handler)
    failures = 0
    for result in results:
        verdict = "PASS" if result.passed else "FAIL"
        detail = f" ({result.detail})" if result.detail else ""
        click.echo(f"[{verdict}] {result.vector_id}{detail}")
        failures += not result.passed
    click.echo(f"{len(results) - failures}/{len(results)} vectors passed")
    sys.exit(1 if failures else 0)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as err:
        click.echo(f"usage error: {err.format_message()}", err=True)
        return 64
    except click.ClickException as err:
        err.show()
        return 1
    except SystemExit as err:
        return int(err.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
