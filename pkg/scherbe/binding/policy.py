# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Cluster selection for unique chunks.

Both selections only pick a cluster; charging the erasure-expanded size is up to the caller.
"""

import hashlib
import logging
from collections.abc import Sequence

from scherbe.erasure import CodingParams
from scherbe.exceptions import BindingError, CapacityExhaustedError

from .models import BindingMode, BindingPolicy, ClusterState

log = logging.getLogger(__name__)


def _expansion(chunk_size: int, cluster: ClusterState, params: CodingParams) -> int:
    return cluster.n * params.piece_len(chunk_size)


def clb_select(chunk_size: int, clusters: Sequence[ClusterState], params: CodingParams) -> int:
    """Cluster with the most free space, lowest id on ties.

    Raises:
        CapacityExhaustedError: not even the emptiest cluster fits the chunk.

    """
    if not clusters:
        raise BindingError("no clusters configured")
    best = min(clusters, key=lambda cluster: (-cluster.free, cluster.cluster_id))
    if best.free < _expansion(chunk_size, best, params):
        raise CapacityExhaustedError(f"no cluster has {_expansion(chunk_size, best, params)} bytes free")
    return best.cluster_id


def initial_user_assignment(user_id: str, clusters: Sequence[ClusterState]) -> int:
    """First 8 bytes of SHA-1(user_id), big-endian, modulo the cluster count."""
    if not clusters:
        raise BindingError("no clusters configured")
    digest = hashlib.sha1(user_id.encode("utf-8"), usedforsecurity=False).digest()
    return clusters[int.from_bytes(digest[:8], "big") % len(clusters)].cluster_id


def ulb_select(user_id: str, policy: BindingPolicy, clusters: Sequence[ClusterState], chunk_size: int, params: CodingParams) -> int:
    """The user's active cluster, or a newly assigned one once the active cluster is full.

    A new assignment goes to the non-full cluster with the fewest assigned users, lowest id on ties.

    Raises:
        CapacityExhaustedError: every cluster is full.

    """
    if policy.mode_of(user_id) is not BindingMode.ULB:
        raise BindingError(f"user {user_id} is not bound per user")
    by_id = {cluster.cluster_id: cluster for cluster in clusters}
    assigned = policy.user_assignments.setdefault(user_id, [initial_user_assignment(user_id, clusters)])
    active = by_id[assigned[-1]]
    if active.free >= _expansion(chunk_size, active, params):
        return active.cluster_id
    candidates = [cluster for cluster in clusters if cluster.free >= _expansion(chunk_size, cluster, params)]
    if not candidates:
        raise CapacityExhaustedError(f"all clusters are full, user {user_id} can not store {chunk_size} bytes")
    chosen = min(candidates, key=lambda cluster: (policy.users_on(cluster.cluster_id), cluster.cluster_id))
    assigned.append(chosen.cluster_id)
    log.info("Assigned new cluster", extra={"user": user_id, "cluster": chosen.cluster_id, "assignments": list(assigned)})
    return chosen.cluster_id
