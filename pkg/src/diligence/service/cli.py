"""Command-line entry point: serve the API, run headless, validate graphs,
and host the registry fixture server. All commands read the same
``DILIGENCE_*`` environment configuration the service uses."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from diligence.engine import NodeState, load_graph, validate_graph
from diligence.errors import DiligenceError
from diligence.models import TriggerPayload
from diligence.pipeline import run_pipeline
from diligence.service.config import (
    build_pipeline_config,
    load_service_graph,
    settings_from_env,
)

_STATE_GLYPH = {
    NodeState.SUCCEEDED: "ok",
    NodeState.FAILED: "FAILED",
    NodeState.SKIPPED: "skipped",
}


@click.group()
def main() -> None:
    """Due-diligence pipeline service."""


@main.command()
@click.option("--host", default=None, help="Listen address (default from env).")
@click.option("--port", default=None, type=int, help="Listen port (default from env).")
def serve(host: str | None, port: int | None) -> None:
    """Start the HTTP API (and console, when built)."""
    import uvicorn

    from diligence.service.app import create_app

    settings = settings_from_env()
    uvicorn.run(
        create_app(settings),
        host=host or settings.host,
        port=port or settings.port,
        log_level="info",
    )


@main.command()
@click.option("--company", required=True, help="Company id from the database.")
@click.option(
    "--out",
    type=click.Path(path_type=Path),
    default=None,
    help="Report output directory (default from env, 'out').",
)
@click.option(
    "--requested-by",
    default="cli@localhost.invalid",
    show_default=True,
    help="Analyst email recorded on the run.",
)
def run(company: str, out: Path | None, requested_by: str) -> None:
    """Execute one run headless and print the node outcomes."""
    settings = settings_from_env()
    config = build_pipeline_config(settings)
    if out is not None:
        config.out_dir = out
    try:
        payload = TriggerPayload(company_id=company, requested_by=requested_by)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    ctx = run_pipeline(config, payload, graph=load_service_graph(settings))

    for node_id, status in ctx.snapshot_statuses().items():
        glyph = _STATE_GLYPH.get(status.state, status.state.value)
        suffix = f"  ({status.error})" if status.error else ""
        click.echo(f"{node_id:16s} {glyph}{suffix}")
    if ctx.run_failed:
        raise click.ClickException(f"run failed: {ctx.failure_reason}")
    deliver = ctx.artifacts.get("deliver") or {}
    if deliver.get("report_path"):
        click.echo(f"report: {deliver['report_path']}")


@main.command("validate-graph")
@click.argument("graph_file", type=click.Path(exists=True, path_type=Path))
def validate_graph_cmd(graph_file: Path) -> None:
    """Check a graph definition file and report violations."""
    try:
        graph = load_graph(graph_file)
    except DiligenceError as exc:
        raise click.ClickException(str(exc))
    report = validate_graph(graph)
    if report.ok:
        click.echo(
            f"{graph_file}: ok ({len(graph.nodes)} nodes, {len(graph.edges)} edges)"
        )
        return
    for violation in report.violations:
        click.echo(f"{graph_file}: {violation}", err=True)
    sys.exit(1)


@main.group()
def fixtures() -> None:
    """Local stand-ins for external systems."""


@fixtures.command("serve")
@click.option(
    "--corpus",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=Path("fixtures/registry"),
    show_default=True,
    help="Registry corpus directory.",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True, type=int)
def fixtures_serve(corpus: Path, host: str, port: int) -> None:
    """Serve the bundled registry corpus over the two-endpoint protocol."""
    from diligence.registry.fixture_server import FixtureRegistryServer

    server = FixtureRegistryServer(corpus, host=host, port=port)
    server.start()
    click.echo(f"registry fixture server listening on {server.base_url}")
    click.echo("press Ctrl+C to stop")
    try:
        import signal

        signal.pause()
    except (KeyboardInterrupt, AttributeError):
        pass
    finally:
        server.stop()


if __name__ == "__main__":
    main()
