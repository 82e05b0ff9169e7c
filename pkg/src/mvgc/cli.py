"""Command-line client for the workbench service.

``mvgc bench`` builds a workload request and posts it to the service API —
by default against an in-process ASGI app, or against a remote instance with
--server. ``mvgc serve`` starts the service. Exit code 0 on success, 2 on a
config error.
"""

from __future__ import annotations

import sys

import click
import httpx

from .bench import emit_results


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # No server given: mount the service in-process behind the same API.
    from fastapi.testclient import TestClient

    from .service import create_app
    return TestClient(create_app())


@click.group()
def main() -> None:
    """Concurrent multiversioning workbench."""


@main.command()
@click.option("--structure", type=click.Choice(["hash", "bst"]), default="hash",
              show_default=True)
@click.option("--scheme", type=click.Choice(["ebr", "steam", "dlrt", "slrt"]),
              default="slrt", show_default=True)
@click.option("--size", type=int, default=10_000, show_default=True,
              help="Initial number of keys (key range is twice this).")
@click.option("--update-threads", type=int, default=8, show_default=True)
@click.option("--small-rtx-threads", type=int, default=0, show_default=True)
@click.option("--large-rtx-threads", type=int, default=0, show_default=True)
@click.option("--mixed", is_flag=True,
              help="Every worker runs 50% updates, 49% lookups, 1% rtxs.")
@click.option("--rtx-size", type=int, default=256, show_default=True)
@click.option("--dist", type=click.Choice(["uniform", "zipf"]), default="uniform",
              show_default=True)
@click.option("--zipf-theta", type=float, default=0.99, show_default=True)
@click.option("--duration-s", type=float, default=2.0, show_default=True)
@click.option("--warmup-s", type=float, default=0.5, show_default=True)
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--out", default="-", show_default=True,
              help="Output path, or - for stdout.")
@click.option("--ops-per-worker", type=int, default=None,
              help="Fixed op count per worker instead of a timed run.")
@click.option("--server", default=None,
              help="Base URL of a running workbench service; default runs "
                   "the service in-process.")
def bench(structure, scheme, size, update_threads, small_rtx_threads,
          large_rtx_threads, mixed, rtx_size, dist, zipf_theta, duration_s,
          warmup_s, runs, seed, fmt, out, ops_per_worker, server) -> None:
    """Run a benchmark workload and emit one record per run."""
    payload = {
        "config": {
            "structure": structure,
            "scheme": scheme,
            "size": size,
            "update_threads": update_threads,
            "small_rtx_threads": small_rtx_threads,
            "large_rtx_threads": large_rtx_threads,
            "mixed": mixed,
            "rtx_size": rtx_size,
            "dist": dist,
            "zipf_theta": zipf_theta,
            "duration_s": duration_s,
            "warmup_s": warmup_s,
            "seed": seed,
            "ops_per_worker": ops_per_worker,
        },
        "runs": runs,
    }
    with _client(server) as client:
        response = client.post("/bench/run", json=payload)
    if response.status_code in (400, 422):
        detail = response.json().get("detail", response.text)
        click.echo(f"config error: {detail}", err=True)
        sys.exit(2)
    response.raise_for_status()
    rows = response.json()["runs"]
    emit_results(rows, fmt, out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the workbench HTTP service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
