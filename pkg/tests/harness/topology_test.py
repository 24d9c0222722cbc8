# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import asyncio

import pytest

from scherbe.binding import BindingMode
from scherbe.exceptions import TopologyError
from scherbe.harness import build_topology, spawn_topology
from scherbe.topology import ClusterSpec
from scherbe.wire import FileList, ListFiles, run_simulation
from tests.helpers.deployment import small_settings

USERS = ["user00", "user01", "user02", "user03", "user04"]


def test_sim_topology_layout():
    topology = build_topology(small_settings(), USERS)
    assert [cluster.members for cluster in topology.clusters] == [
        ["c00n00", "c00n01", "c00n02", "c00n03"],
        ["c01n00", "c01n01", "c01n02", "c01n03"],
    ]
    assert topology.directory_address == "c00n00"
    assert [topology.switch_of(user) for user in USERS] == ["c00n00", "c01n00", "c00n01", "c01n01", "c00n02"]
    assert (topology.n, topology.k) == (4, 2)


def test_socket_addresses():
    topology = build_topology(small_settings(TRANSPORT="sockets", BASE_PORT=9000), USERS[:1])
    assert topology.addresses()[:5] == ["127.0.0.1:9000", "127.0.0.1:9001", "127.0.0.1:9002", "127.0.0.1:9003", "127.0.0.1:9004"]


def test_mixed_binding():
    topology = build_topology(small_settings(MIXED_ULB_FRACTION=0.4), USERS)
    assert [topology.users[user].mode for user in USERS] == [BindingMode.ULB] * 2 + [BindingMode.CLB] * 3


def test_spawn_sim_registers_every_node():
    settings = small_settings()
    topology = build_topology(settings, USERS[:2])

    async def body():
        async with spawn_topology(settings, topology) as running:
            harness = running.transport("harness")
            listing = await harness.call("c01n00", ListFiles(user="user01"), FileList)
            return running.network.endpoints(), sorted(running.nodes), listing.files

    endpoints, nodes, files = run_simulation(body())
    assert len(nodes) == 8
    assert endpoints == sorted(nodes + ["harness"])
    assert files == []


def test_spawn_rejects_duplicate_addresses():
    settings = small_settings()
    topology = build_topology(settings, USERS[:1])
    clone = ClusterSpec(id=1, capacity=1, members=topology.clusters[0].members)
    broken = topology.model_copy(update={"clusters": [topology.clusters[0], clone]})


    async def body():
        async with spawn_topology(settings, broken):
            pass

    with pytest.raises(TopologyError):
        run_simulation(body())


@pytest.mark.slow
def test_spawn_node_processes(tmp_path, free_port):
    settings = small_settings(TRANSPORT="sockets", BASE_PORT=free_port, CLUSTERS=1, N=2, K=1, STORE_ROOT=tmp_path)
    topology = build_topology(settings, ["alice"])

    async def body():
        async with spawn_topology(settings, topology) as running:
            return await running.scan(running.transport("harness"))

    scans = asyncio.run(body())
    assert set(scans) == set(topology.addresses())
    assert all(scan.piece_count == 0 for scan in scans.values())
    assert (tmp_path / "topology.yaml").is_file()
