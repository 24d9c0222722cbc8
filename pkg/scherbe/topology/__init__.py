# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Cluster topology files."""

from .loader import TopologyLoader, check_topology
from .models import ClusterSpec, Topology, UserSpec
from .validator import TopologyValidator

__all__ = ["ClusterSpec", "Topology", "TopologyLoader", "TopologyValidator", "UserSpec", "check_topology"]
