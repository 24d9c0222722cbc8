# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Load a cluster topology from a YAML file."""

from pathlib import Path

import yaml
from pydantic import ValidationError

from scherbe.exceptions import TopologyError

from .models import Topology
from .validator import TopologyValidator


def check_topology(topology: Topology) -> Topology:
    """Raise a TopologyError listing every semantic problem of `topology`."""
    errors = TopologyValidator(topology).validate_all()
    if errors:
        raise TopologyError("; ".join(errors))
    return topology


class TopologyLoader:
    """Loads and validates topology files."""

    @staticmethod
    def load(path: Path, *, check: bool = True) -> Topology:
        """Deserialize a YAML file into a Topology, semantically checked unless `check` is False.

        Raises:
            TopologyError: missing file, invalid YAML, schema violation or inconsistent clusters.

        """
        path = Path(path)
        if not path.exists():
            raise TopologyError(f"topology file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
            topology = Topology.model_validate(raw)
        except (yaml.YAMLError, ValidationError) as err:
            raise TopologyError(f"invalid topology {path}: {err}") from err
        return check_topology(topology) if check else topology

    @staticmethod
    def dump(topology: Topology, path: Path) -> None:
        path.write_text(yaml.safe_dump(topology.model_dump(mode="json", exclude_none=True), sort_keys=False), encoding="utf-8")
