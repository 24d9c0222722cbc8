# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Pydantic models of the cluster topology file.

A topology lists the disjoint clusters, the users with their switching node and
binding mode, the coding parameters and where the placement directory runs.

```yaml
n: 3
k: 2
bindingMode: CLB
clusters:
  - id: 0
    capacity: 1073741824
    members: [127.0.0.1:7000, 127.0.0.1:7001, 127.0.0.1:7002]
users:
  alice:
    switch: 127.0.0.1:7000
    mode: ULB
```

```python
from scherbe.topology import Topology

topology = Topology.model_validate(
    {"n": 2, "k": 1, "clusters": [{"id": 0, "capacity": 1024, "members": ["a", "b"]}]}
)
print(topology.directory_address)
#> a
print(topology.locate("b"))
#> (0, 1)
```
"""

from pydantic import BaseModel, ConfigDict, Field

from scherbe.binding import BindingMode, BindingPolicy, ClusterState
from scherbe.erasure import CodingParams
from scherbe.exceptions import TopologyError
from scherbe.metadata import ClusterId


class ClusterSpec(BaseModel):
    id: ClusterId
    capacity: int = Field(gt=0)
    members: list[str] = Field(min_length=1)


class UserSpec(BaseModel):
    switch: str
    mode: BindingMode | None = None


class Topology(BaseModel):
    """Root model of a topology file."""

    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(10, ge=1, le=255)
    k: int = Field(5, ge=1, le=255)
    bindingMode: BindingMode = BindingMode.CLB
    directory: str | None = None
    clusters: list[ClusterSpec] = Field(min_length=1)
    users: dict[str, UserSpec] = Field(default_factory=dict)

    @property
    def params(self) -> CodingParams:
        return CodingParams(n=self.n, k=self.k)

    @property
    def directory_address(self) -> str:
        """Explicit directory address, else position 0 of the lowest cluster id."""
        if self.directory is not None:
            return self.directory
        return min(self.clusters, key=lambda cluster: cluster.id).members[0]

    def addresses(self) -> list[str]:
        return [member for cluster in sorted(self.clusters, key=lambda c: c.id) for member in cluster.members]

    def cluster(self, cluster_id: int) -> ClusterSpec:
        for cluster in self.clusters:
            if cluster.id == cluster_id:
                return cluster
        raise TopologyError(f"unknown cluster {cluster_id}")

    def locate(self, address: str) -> tuple[int, int]:
        """(cluster id, position) of a node address."""
        for cluster in self.clusters:
            if address in cluster.members:
                return cluster.id, cluster.members.index(address)
        raise TopologyError(f"node {address} is not a member of any cluster")

    def switch_of(self, user_id: str) -> str:
        try:
            return self.users[user_id].switch
        except KeyError as err:
            raise TopologyError(f"user {user_id} has no switching node") from err

    def cluster_states(self) -> list[ClusterState]:
        return [
            ClusterState(cluster_id=cluster.id, members=list(cluster.members), capacity=cluster.capacity)
            for cluster in sorted(self.clusters, key=lambda c: c.id)
        ]

    def binding_policy(self) -> BindingPolicy:
        return BindingPolicy(
            default_mode=self.bindingMode,
            user_modes={user_id: user.mode for user_id, user in self.users.items() if user.mode is not None},
        )
