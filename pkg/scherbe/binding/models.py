# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from enum import Enum

from pydantic import BaseModel, Field, model_validator

from scherbe.metadata import ClusterId


class BindingMode(str, Enum):
    CLB = "CLB"
    """chunk-level binding, every unique chunk goes to the cluster with most free space."""
    ULB = "ULB"
    """user-level binding, all chunks of a user go to the user's active cluster."""


class ClusterState(BaseModel):
    cluster_id: ClusterId
    members: list[str] = Field(min_length=1)
    capacity: int = Field(gt=0)
    used: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "ClusterState":
        if self.used > self.capacity:
            raise ValueError(f"cluster {self.cluster_id} uses {self.used} of {self.capacity} bytes")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"cluster {self.cluster_id} lists a member twice")
        return self

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def free(self) -> int:
        return self.capacity - self.used

    def coding_member(self, chunk_id: bytes) -> str:
        """Member that encodes and fans out a chunk: position chunk_id[0] mod n."""
        return self.members[chunk_id[0] % self.n]


class BindingPolicy(BaseModel):
    """Per-user binding mode and, for ULB users, the ordered cluster assignments (last is active)."""

    default_mode: BindingMode = BindingMode.CLB
    user_modes: dict[str, BindingMode] = Field(default_factory=dict)
    user_assignments: dict[str, list[int]] = Field(default_factory=dict)

    @property
    def mode(self) -> BindingMode:
        return self.default_mode

    def mode_of(self, user_id: str) -> BindingMode:
        return self.user_modes.get(user_id, self.default_mode)

    def users_on(self, cluster_id: int) -> int:
        return sum(1 for assigned in self.user_assignments.values() if cluster_id in assigned)
