# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Semantic validation of a Topology.

All methods return a list of human-readable error strings, an empty list means no errors.
"""

from collections import Counter

from .models import Topology


class TopologyValidator:
    """Validates a Topology for disjoint clusters and consistent references."""

    def __init__(self, topology: Topology) -> None:
        self._topology = topology

    def validate_coding(self) -> list[str]:
        if self._topology.k > self._topology.n:
            return [f"k={self._topology.k} exceeds n={self._topology.n}"]
        return []

    def validate_clusters(self) -> list[str]:
        errors: list[str] = []
        ids = Counter(cluster.id for cluster in self._topology.clusters)
        errors.extend(f"cluster id {cluster_id} is declared {count} times" for cluster_id, count in sorted(ids.items()) if count > 1)
        for cluster in self._topology.clusters:
            if len(cluster.members) != self._topology.n:
                errors.append(f"cluster {cluster.id} has {len(cluster.members)} members, n={self._topology.n}")
        return errors

    def validate_addresses(self) -> list[str]:
        """Every node address appears exactly once over all clusters."""
        seen = Counter(member for cluster in self._topology.clusters for member in cluster.members)
        return [f"node {address} is listed {count} times" for address, count in sorted(seen.items()) if count > 1]

    def validate_users(self) -> list[str]:
        members = {member for cluster in self._topology.clusters for member in cluster.members}
        errors = [
            f"user {user_id} switches through unknown node {user.switch}"
            for user_id, user in sorted(self._topology.users.items())
            if user.switch not in members
        ]

        if self._topology.directory is not None and self._topology.directory not in members:
            errors.append(f"directory node {self._topology.directory} is not a cluster member")
        return errors

    def validate_all(self) -> list[str]:
        return self.validate_coding() + self.validate_clusters() + self.validate_addresses() + self.validate_users()
