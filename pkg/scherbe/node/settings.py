# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Settings of a storage node daemon."""

from pathlib import Path

from pydantic import Field
from pydantic_settings import SettingsConfigDict

from scherbe.binding import BindingMode
from scherbe.core.settings import Settings
from scherbe.exceptions import ConfigError
from scherbe.topology import Topology
from scherbe.wire.sockets import DEFAULT_MAX_FRAME


class NodeSettings(Settings):
    """Configuration of one node; `N`, `K`, `BINDING_MODE`, `CLUSTER_ID` and `POSITION` are cross-checked against the topology."""

    model_config = SettingsConfigDict(env_prefix="NODE__")

    LISTEN: str = Field(description="host:port of this node, also its identity in the topology")
    TOPOLOGY: Path | None = Field(None, description="YAML topology file")
    CLUSTER_ID: int | None = Field(None, ge=0, le=0xFFFE)
    POSITION: int | None = Field(None, ge=0, le=254)
    N: int | None = Field(None, ge=1, le=255)
    K: int | None = Field(None, ge=1, le=255)
    BINDING_MODE: BindingMode | None = None
    CAPACITY: int = Field(1 << 30, gt=0, description="bytes of piece payload this node accepts")
    STORE_DIR: Path | None = Field(None, description="piece and metadata directory, in memory when unset")
    RETRIES: int = Field(2, ge=0, description="extra attempts per piece during fan-out")
    REQUEST_TIMEOUT: float = Field(10.0, gt=0, description="seconds per node to node request")
    MAX_FRAME: int = Field(DEFAULT_MAX_FRAME, gt=13)
    METRICS_PORT: int | None = Field(None, ge=1, le=65535)

    def check_against(self, topology: Topology) -> tuple[int, int]:
        """(cluster id, position) of this node.

        Raises:
            ConfigError: a cross-checked key disagrees with the topology.

        """
        cluster_id, position = topology.locate(self.LISTEN)
        expected = {
            "CLUSTER_ID": (self.CLUSTER_ID, cluster_id),
            "POSITION": (self.POSITION, position),
            "N": (self.N, topology.n),
            "K": (self.K, topology.k),
            "BINDING_MODE": (self.BINDING_MODE, topology.bindingMode),
        }
        for key, (configured, actual) in expected.items():
            if configured is not None and configured != actual:
                raise ConfigError(f"node {self.LISTEN}: {key}={configured} but the topology says {actual}")
        return cluster_id, position
