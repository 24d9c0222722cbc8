# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import asyncio
import logging

from scherbe.exceptions import ConfigError
from scherbe.topology import TopologyLoader
from scherbe.wire import SocketServer, SocketTransport

from .server import StorageNode
from .settings import NodeSettings

log = logging.getLogger(__name__)


async def serve_node(settings: NodeSettings, ready: asyncio.Event | None = None) -> None:
    """Run one node on TCP until cancelled.

    Raises:
        ConfigError: no topology configured or the node is inconsistent with it.
        TransportError: the listen address is unusable.

    """
    if settings.TOPOLOGY is None:
        raise ConfigError(f"node {settings.LISTEN} has no TOPOLOGY configured")
    topology = TopologyLoader.load(settings.TOPOLOGY)
    transport = SocketTransport(settings.LISTEN, max_frame=settings.MAX_FRAME)
    node = StorageNode(settings, topology, transport)
    server = SocketServer(settings.LISTEN, node.handle, max_frame=settings.MAX_FRAME)
    await server.start()
    if settings.METRICS_PORT is not None:
        node.metrics.serve(settings.METRICS_PORT)
    log.info(
        "Node started",
        extra={"address": node.address, "cluster": node.cluster_id, "position": node.position, "directory": node.directory is not None},
    )
    if ready is not None:
        ready.set()
    try:
        await server.serve_forever()
    finally:
        await server.close()
        await transport.close()
        log.info("Node stopped", extra={"address": node.address})


def run_node(settings: NodeSettings) -> None:
    try:
        asyncio.run(serve_node(settings))
    except KeyboardInterrupt:
        log.info("Interrupted", extra={"address": settings.LISTEN})
