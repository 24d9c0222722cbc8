# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""CLI commands of an end device."""

from __future__ import annotations

import asyncio
from collections.abc import Awaitable, Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Annotated, TypeVar

import typer
from rich.console import Console
from rich.table import Table

if TYPE_CHECKING:
    from scherbe.client import StorageClient

app = typer.Typer(
    no_args_is_help=True,
    help="Store, fetch, delete and synchronise files.",
)
console = Console()

T = TypeVar("T")


@dataclass
class _Device:
    user: str
    topology: Path
    switch: str | None
    cache_dir: Path | None
    config: Path | None


@app.callback()
def device_options(  # pylint: disable=too-many-positional-arguments
    ctx: typer.Context,
    user: Annotated[str, typer.Option("--user", "-u", help="User id as listed in the topology.")],
    topology: Annotated[Path, typer.Option("--topology", "-t", help="YAML topology file.")],
    switch: Annotated[str | None, typer.Option("--switch", help="host:port of the switching node, defaults to the topology's.")] = None,
    cache_dir: Annotated[Path | None, typer.Option("--cache-dir", help="Persistent chunk and metadata cache.")] = None,
    config: Annotated[Path | None, typer.Option("--config", "-c", help="KEY=value file with ClientSettings keys.")] = None,
) -> None:
    """Options shared by all device commands."""
    ctx.obj = _Device(user=user, topology=topology, switch=switch, cache_dir=cache_dir, config=config)


def _run(device: _Device, action: Callable[[StorageClient], Awaitable[T]]) -> T:
    """Run `action` against a socket client; domain errors end the process with their exit code."""
    from scherbe.cli import exit_code  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.client import ClientSettings, LocalCache, StorageClient  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.core.settings import load_settings  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.exceptions import LoggedCustomException, ScherbeError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.topology import TopologyLoader  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.wire import SocketTransport  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    async def session() -> T:
        settings = load_settings(ClientSettings, device.config)
        topology = TopologyLoader.load(device.topology)
        transport = SocketTransport(f"device-{device.user}")
        try:
            client = StorageClient(
                device.user,
                device.switch or topology.switch_of(device.user),
                transport,
                topology,
                cache=LocalCache(settings.CACHE_BUDGET, device.cache_dir),
                settings=settings,
            )
            return await action(client)
        finally:
            await transport.close()

    try:
        return asyncio.run(session())
    except (ScherbeError, LoggedCustomException) as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(exit_code(exc)) from exc


@app.command("put")
def put_file(
    ctx: typer.Context,
    path: Annotated[Path, typer.Argument(help="File to upload.", exists=True, dir_okay=False)],
    name: Annotated[str | None, typer.Option("--name", "-n", help="Stored file name, defaults to the base name.")] = None,
) -> None:
    """Upload a file; only chunks the system does not hold yet are sent."""
    report = _run(ctx.obj, lambda client: client.upload_file(path, name))
    typer.echo(
        f"{report.file_name}: {report.total_len} bytes, {report.chunks_total} chunks, "
        f"{report.chunks_missing} uploaded" + ("" if report.accepted else ", a newer copy was kept")
    )


@app.command("get")
def get_file(
    ctx: typer.Context,
    name: Annotated[str, typer.Argument(help="Stored file name.")],
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Target path, defaults to the file name.")] = None,
) -> None:
    """Download a file."""
    data, report = _run(ctx.obj, lambda client: client.retrieve_file(name))
    target = output or Path(name)
    target.write_bytes(data)
    typer.echo(f"{target}: {report.total_len} bytes in {report.duration_ms:.1f} ms, {report.chunks_fetched} chunks fetched")


@app.command("rm")
def remove_file(
    ctx: typer.Context,
    name: Annotated[str, typer.Argument(help="Stored file name.")],
) -> None:
    """Delete a file; chunks no other file references are collected."""
    _run(ctx.obj, lambda client: client.delete_file(name))
    typer.echo(f"Deleted '{name}'.")


@app.command("ls")
def list_files(ctx: typer.Context) -> None:
    """List the user's files on the switching node."""
    listing = _run(ctx.obj, lambda client: client.list_files())
    if console.is_terminal:
        table = Table(title=f"Files of {ctx.obj.user}", header_style="bold magenta")
        table.add_column("NAME", style="cyan", overflow="fold")
        table.add_column("TIMESTAMP", justify="right")
        for entry in listing.files:
            table.add_row(entry.file_name, str(entry.timestamp))
        console.print(table)
        return
    typer.echo("\n".join(f"{entry.file_name}\t{entry.timestamp}" for entry in listing.files))


@app.command("sync")
def sync_files(ctx: typer.Context) -> None:
    """Converge the cached FileMetas with the switching node, last writer wins."""
    if ctx.obj.cache_dir is None:
        typer.echo("Error: sync needs --cache-dir, the device keeps nothing otherwise", err=True)
        raise typer.Exit(3)
    report = _run(ctx.obj, lambda client: client.sync_local_meta())
    typer.echo(f"pushed {len(report.pushed)}, pulled {len(report.pulled)}, in sync {len(report.in_sync)}, dropped {len(report.dropped)}")
