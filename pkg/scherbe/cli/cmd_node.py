# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""CLI commands for storage node daemons and topology files."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import typer

app = typer.Typer(
    no_args_is_help=True,
    help="Run storage nodes and check topology files.",
)


@app.command("start")
def start_node(  # pylint: disable=too-many-positional-arguments
    config: Annotated[Path | None, typer.Option("--config", "-c", help="KEY=value file with NodeSettings keys.")] = None,
    listen: Annotated[str | None, typer.Option("--listen", help="host:port, also the node's identity in the topology.")] = None,
    topology: Annotated[Path | None, typer.Option("--topology", help="YAML topology file.")] = None,
    store_dir: Annotated[Path | None, typer.Option("--store-dir", help="Directory for pieces and metadata.")] = None,
    capacity: Annotated[int | None, typer.Option("--capacity", help="Bytes of piece payload this node accepts.")] = None,
    metrics_port: Annotated[int | None, typer.Option("--metrics-port", help="Expose prometheus metrics on this port.")] = None,
) -> None:
    """Serve one node until interrupted."""
    from scherbe.cli import exit_code  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.core.settings import load_settings  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.exceptions import ScherbeError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.node import NodeSettings, run_node  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    overrides = {
        key: value
        for key, value in {
            "LISTEN": listen,
            "TOPOLOGY": topology,
            "STORE_DIR": store_dir,
            "CAPACITY": capacity,
            "METRICS_PORT": metrics_port,
        }.items()
        if value is not None
    }
    try:
        run_node(load_settings(NodeSettings, config, **overrides))
    except ScherbeError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(exit_code(exc)) from exc


@app.command("check")
def check_topology_file(
    topology_path: Annotated[Path, typer.Argument(help="Path to the YAML topology file.")],
) -> None:
    """Validate a topology file and report all errors."""
    from scherbe.exceptions import TopologyError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.topology import TopologyLoader, TopologyValidator  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    try:
        topology = TopologyLoader.load(topology_path, check=False)
    except TopologyError as exc:
        typer.echo(f"Schema error: {exc}", err=True)
        raise typer.Exit(1) from exc

    errors = TopologyValidator(topology).validate_all()
    if errors:
        typer.echo("Validation failed:\n", err=True)
        for error in errors:
            typer.echo(f"  - {error}", err=True)
        raise typer.Exit(1)

    typer.echo(f"Topology '{topology_path}' is valid: {len(topology.clusters)} clusters, {len(topology.addresses())} nodes.")
