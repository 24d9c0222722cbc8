# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import pytest

from scherbe.binding import BindingMode
from scherbe.exceptions import TopologyError
from scherbe.topology import ClusterSpec, Topology, TopologyLoader, UserSpec

TOPOLOGY_YAML = """
n: 3
k: 2
bindingMode: ULB
clusters:
  - id: 1
    capacity: 2048
    members: [10.0.1.1:7000, 10.0.1.2:7000, 10.0.1.3:7000]
  - id: 0
    capacity: 1024
    members: [10.0.0.1:7000, 10.0.0.2:7000, 10.0.0.3:7000]
users:
  alice:
    switch: 10.0.0.1:7000
  bob:
    switch: 10.0.1.2:7000
    mode: CLB
"""


@pytest.fixture
def topology_file(tmp_path):
    path = tmp_path / "topology.yaml"
    path.write_text(TOPOLOGY_YAML, encoding="utf-8")
    return path


def test_load(topology_file):
    topology = TopologyLoader.load(topology_file)
    assert topology.params.n == 3
    assert topology.params.k == 2
    assert topology.bindingMode is BindingMode.ULB
    assert topology.directory_address == "10.0.0.1:7000"
    assert topology.addresses()[:3] == ["10.0.0.1:7000", "10.0.0.2:7000", "10.0.0.3:7000"]
    assert topology.locate("10.0.1.3:7000") == (1, 2)
    assert topology.switch_of("bob") == "10.0.1.2:7000"


def test_derived_state(topology_file):
    topology = TopologyLoader.load(topology_file)
    assert [cluster.cluster_id for cluster in topology.cluster_states()] == [0, 1]
    assert topology.cluster_states()[1].capacity == 2048
    policy = topology.binding_policy()
    assert policy.mode_of("alice") is BindingMode.ULB
    assert policy.mode_of("bob") is BindingMode.CLB


def test_unknown_lookups(topology_file):
    topology = TopologyLoader.load(topology_file)
    with pytest.raises(TopologyError):
        topology.locate("10.9.9.9:7000")
    with pytest.raises(TopologyError):
        topology.switch_of("carol")
    with pytest.raises(TopologyError):
        topology.cluster(7)


def test_dump_and_reload(tmp_path):
    topology = Topology(
        n=2,
        k=1,
        directory="b:1",
        clusters=[ClusterSpec(id=0, capacity=10, members=["a:1", "b:1"])],
        users={"alice": UserSpec(switch="a:1")},
    )
    path = tmp_path / "out.yaml"
    TopologyLoader.dump(topology, path)
    assert TopologyLoader.load(path) == topology
    assert "mode" not in path.read_text(encoding="utf-8")


@pytest.mark.parametrize(
    "content",
    [
        pytest.param("n: [", id="bad-yaml"),
        pytest.param("n: 3\nk: 2\n", id="no-clusters"),
        pytest.param("n: 2\nk: 1\nbindingMode: RADMAD\nclusters: [{id: 0, capacity: 1, members: [a, b]}]\n", id="unknown-mode"),
        pytest.param("n: 2\nk: 1\nclusters: [{id: 0, capacity: 1, members: [a]}]\n", id="wrong-member-count"),
    ],
)
def test_invalid_files(tmp_path, content):
    path = tmp_path / "topology.yaml"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(TopologyError):
        TopologyLoader.load(path)


def test_missing_file(tmp_path):
    with pytest.raises(TopologyError):
        TopologyLoader.load(tmp_path / "nope.yaml")


def test_unchecked_load(tmp_path):
    path = tmp_path / "topology.yaml"
    path.write_text("n: 2\nk: 1\nclusters: [{id: 0, capacity: 1, members: [a]}]\n", encoding="utf-8")
    assert TopologyLoader.load(path, check=False).clusters[0].members == ["a"]
