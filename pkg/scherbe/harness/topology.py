# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Bringing up a whole deployment: in-process on the simulator or one OS process per node."""

import asyncio
import logging
import sys
import tempfile
from collections.abc import AsyncIterator
from contextlib import AsyncExitStack, asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from scherbe.binding import BindingMode
from scherbe.exceptions import ScherbeError, TopologyError, TransportError
from scherbe.metadata import FileMeta
from scherbe.node import NodeSettings, StorageNode
from scherbe.topology import ClusterSpec, Topology, TopologyLoader, UserSpec, check_topology
from scherbe.wire import FileList, GetMeta, ListFiles, MetaReply, Scan, ScanReply, SimNetwork, SocketTransport, Transport

from .settings import ExperimentSettings

log = logging.getLogger(__name__)

READINESS_CHECK = GetMeta(user="readiness", file_name="readiness")


def node_address(settings: ExperimentSettings, cluster_id: int, position: int) -> str:
    if settings.TRANSPORT == "sim":
        return f"c{cluster_id:02d}n{position:02d}"
    return f"{settings.HOST}:{settings.BASE_PORT + cluster_id * settings.N + position}"


def build_topology(settings: ExperimentSettings, users: list[str]) -> Topology:
    """E clusters of n nodes; user i switches through cluster i mod E.

    With MIXED_ULB_FRACTION the first share of the users is bound by ULB and the rest by CLB.
    """
    clusters = [
        ClusterSpec(id=cid, capacity=settings.CLUSTER_CAPACITY, members=[node_address(settings, cid, pos) for pos in range(settings.N)])
        for cid in range(settings.CLUSTERS)
    ]
    ulb_users = round(settings.MIXED_ULB_FRACTION * len(users)) if settings.MIXED_ULB_FRACTION is not None else None
    user_specs = {}
    for index, user in enumerate(users):
        mode = None
        if ulb_users is not None:
            mode = BindingMode.ULB if index < ulb_users else BindingMode.CLB
        members = clusters[index % settings.CLUSTERS].members
        user_specs[user] = UserSpec(switch=members[(index // settings.CLUSTERS) % settings.N], mode=mode)
    return check_topology(Topology(n=settings.N, k=settings.K, bindingMode=settings.BINDING_MODE, clusters=clusters, users=user_specs))


@dataclass
class RunningTopology:
    """Handle on a deployment; `transport` creates the endpoints devices talk through."""

    topology: Topology
    network: SimNetwork | None = None
    nodes: dict[str, StorageNode] = field(default_factory=dict)
    processes: dict[str, asyncio.subprocess.Process] = field(default_factory=dict)
    transports: list[Transport] = field(default_factory=list)

    def transport(self, name: str) -> Transport:
        transport: Transport = self.network.register(name) if self.network is not None else SocketTransport(name)
        self.transports.append(transport)
        return transport

    @property
    def wire_bytes(self) -> int:
        """All frames in sim mode; in socket mode only what the harness' own transports saw."""
        if self.network is not None:
            return self.network.bytes_on_wire
        return sum(transport.bytes_sent + transport.bytes_received for transport in self.transports)

    async def scan(self, transport: Transport, *, detail: bool = False) -> dict[str, ScanReply]:
        addresses = self.topology.addresses()
        replies = await asyncio.gather(*(transport.call(address, Scan(detail=detail), ScanReply, 60.0) for address in addresses))
        return dict(zip(addresses, replies))

    async def stored_metas(self, transport: Transport) -> list[FileMeta]:
        """Every FileMeta held by the users' switching nodes."""
        metas = []
        for user, spec in sorted(self.topology.users.items()):
            listing = await transport.call(spec.switch, ListFiles(user=user), FileList, 60.0)
            for entry in listing.files:
                reply = await transport.call(spec.switch, GetMeta(user=user, file_name=entry.file_name), MetaReply, 60.0)
                if reply.meta is not None:
                    metas.append(reply.meta)
        return metas

    async def close(self) -> None:
        for transport in self.transports:
            await transport.close()
        for address, process in self.processes.items():
            if process.returncode is None:
                process.terminate()
                try:
                    await asyncio.wait_for(process.wait(), 10.0)
                except TimeoutError:
                    log.warning("Killing node", extra={"address": address})
                    process.kill()
                    await process.wait()


def _spawn_sim(settings: ExperimentSettings, topology: Topology, network: SimNetwork) -> RunningTopology:
    running = RunningTopology(topology=topology, network=network)
    for address in topology.addresses():
        endpoint = network.register(address)
        node_settings = NodeSettings(LISTEN=address, CAPACITY=settings.CLUSTER_CAPACITY)
        node = StorageNode(node_settings, topology, endpoint)
        endpoint.handler = node.handle
        running.nodes[address] = node
    return running


def _log_tail(path: Path, lines: int = 5) -> str:
    try:
        return " | ".join(path.read_text(encoding="utf-8", errors="replace").strip().splitlines()[-lines:])
    except OSError:
        return ""


async def _wait_ready(address: str, process: asyncio.subprocess.Process, log_path: Path, deadline: float) -> None:
    loop = asyncio.get_running_loop()
    transport = SocketTransport("readiness")
    try:
        while True:
            if process.returncode is not None:
                raise TopologyError(f"node {address} exited with {process.returncode}: {_log_tail(log_path)}")
            try:
                await transport.call(address, READINESS_CHECK, MetaReply, 1.0)
                return
            except (TransportError, ScherbeError):
                if loop.time() > deadline:
                    raise TopologyError(f"node {address} did not answer in time: {_log_tail(log_path)}") from None
                await asyncio.sleep(0.1)
    finally:
        await transport.close()


async def _spawn_processes(settings: ExperimentSettings, topology: Topology, root: Path) -> RunningTopology:
    running = RunningTopology(topology=topology)
    topology_path = root / "topology.yaml"
    TopologyLoader.dump(topology, topology_path)
    logs: dict[str, Path] = {}
    try:
        for address in topology.addresses():
            slug = address.replace(":", "_")
            logs[address] = root / f"{slug}.log"
            with logs[address].open("wb") as output:
                # fmt: off
                running.processes[address] = await asyncio.create_subprocess_exec(
                    sys.executable, "-m", "scherbe", "--log-level", "WARNING", "node", "start",
                    "--listen", address, "--topology", str(topology_path),
                    "--store-dir", str(root / slug), "--capacity", str(settings.CLUSTER_CAPACITY),
                    stdout=output, stderr=asyncio.subprocess.STDOUT,
                )
                # fmt: on
        deadline = asyncio.get_running_loop().time() + settings.STARTUP_TIMEOUT
        await asyncio.gather(*(_wait_ready(address, process, logs[address], deadline) for address, process in running.processes.items()))
    except BaseException:
        await running.close()
        raise
    return running


@asynccontextmanager
async def spawn_topology(settings: ExperimentSettings, topology: Topology) -> AsyncIterator[RunningTopology]:
    """Start every node of `topology`, yield the running deployment and tear it down on exit.

    In sim mode this must run inside `run_simulation`.

    Raises:
        TopologyError: the topology is inconsistent, or a node process failed to come up.

    """
    check_topology(topology)
    async with AsyncExitStack() as stack:
        if settings.TRANSPORT == "sim":
            running = _spawn_sim(settings, topology, SimNetwork(settings.LATENCY.model))
        else:
            root = settings.STORE_ROOT or Path(stack.enter_context(tempfile.TemporaryDirectory(prefix="scherbe-")))
            root.mkdir(parents=True, exist_ok=True)
            running = await _spawn_processes(settings, topology, root)
        stack.push_async_callback(running.close)
        log.info(
            "Topology up",
            extra={"transport": settings.TRANSPORT, "clusters": len(topology.clusters), "nodes": len(topology.addresses())},
        )

        yield running
    log.info("Topology down", extra={"transport": settings.TRANSPORT})

