# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Experiment configuration, read from a flat `KEY=value` file such as

```
BINDING_MODE=ULB
N=10
K=5
CLUSTERS=20
LATENCY__BASE_MS=5
WORKLOAD__USERS=10
WORKLOAD__SHARED_FRACTION=0.3
```
"""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import SettingsConfigDict

from scherbe.binding import BindingMode
from scherbe.client import ChunkingSettings
from scherbe.core.settings import Settings
from scherbe.erasure import CodingParams
from scherbe.wire import LatencyModel

from .workload import WorkloadSpec


class LatencySettings(BaseModel):
    BASE_MS: float = Field(5.0, ge=0)
    PER_BYTE_MS: float = Field(0.002, ge=0)
    JITTER_MS: float = Field(1.0, ge=0)
    SEED: int = Field(0, ge=0)
    CONTENTION: bool = Field(True, description="serialise the frames each node sends")

    @property
    def model(self) -> LatencyModel:
        return LatencyModel(
            base_ms=self.BASE_MS,
            per_byte_ms=self.PER_BYTE_MS,
            jitter_ms=self.JITTER_MS,
            seed=self.SEED,
            contention=self.CONTENTION,
        )


class WorkloadSettings(BaseModel):
    USERS: int = Field(10, ge=1)
    FILES_PER_USER: int = Field(50, ge=1)
    MIN_FILE_SIZE: int = Field(64 * 1024, ge=1)
    MAX_FILE_SIZE: int = Field(4 * 1024 * 1024, ge=1)
    REPEAT_FRACTION: float = Field(0.05, ge=0, le=1)
    SHARED_FRACTION: float = Field(0.3, ge=0, le=1)
    SHARED_POOL: int = Field(16, ge=1)
    DAYS: int = Field(21, ge=1)
    GETS_PER_USER: int = Field(100, ge=0)
    BURSTS_PER_DAY: int = Field(2, ge=0)
    CROWD_SIZE: int = Field(4, ge=1)
    DELETE_FRACTION: float = Field(0.0, ge=0, le=1)
    SEED: int = Field(0, ge=0)

    def spec(self) -> WorkloadSpec:
        return WorkloadSpec(
            users=self.USERS,
            files_per_user=self.FILES_PER_USER,
            min_file_size=self.MIN_FILE_SIZE,
            max_file_size=self.MAX_FILE_SIZE,
            repeat_fraction=self.REPEAT_FRACTION,
            shared_fraction=self.SHARED_FRACTION,
            shared_pool=self.SHARED_POOL,
            days=self.DAYS,
            gets_per_user=self.GETS_PER_USER,
            bursts_per_day=self.BURSTS_PER_DAY,
            crowd_size=self.CROWD_SIZE,
            delete_fraction=self.DELETE_FRACTION,
            seed=self.SEED,
        )


class ExperimentSettings(Settings):
    """One experiment: deployment, coding, network and workload."""

    model_config = SettingsConfigDict(env_prefix="HARNESS__")

    BINDING_MODE: BindingMode = BindingMode.CLB
    MIXED_ULB_FRACTION: float | None = Field(None, ge=0, le=1, description="share of users bound by ULB, the others by CLB")
    N: int = Field(10, ge=1, le=255)
    K: int = Field(5, ge=1, le=255)
    CLUSTERS: int = Field(20, ge=1)
    CLUSTER_CAPACITY: int = Field(64 * 1024**3, gt=0, description="bytes of piece payload per cluster")
    TRANSPORT: Literal["sim", "sockets"] = "sim"
    FETCH_WINDOW: int = Field(1, ge=1, description="chunks a device fetches concurrently")
    TRACE_TIME_SCALE: float = Field(1.0, ge=0, description="seconds of run time per second of trace time")
    HOST: str = "127.0.0.1"
    BASE_PORT: int = Field(7400, ge=1, le=65535)
    STORE_ROOT: Path | None = Field(None, description="node directories in socket mode, a temporary directory when unset")
    STARTUP_TIMEOUT: float = Field(15.0, gt=0, description="seconds a spawned node may take to answer")
    CHECK_CONSISTENCY: bool = True
    LATENCY: LatencySettings = LatencySettings()
    CHUNKING: ChunkingSettings = ChunkingSettings()
    WORKLOAD: WorkloadSettings = WorkloadSettings()

    @model_validator(mode="after")
    def _check_coding(self) -> "ExperimentSettings":
        if self.K > self.N:
            raise ValueError(f"K={self.K} exceeds N={self.N}")
        if self.TRANSPORT == "sockets" and self.BASE_PORT + self.CLUSTERS * self.N > 65536:
            raise ValueError(f"{self.CLUSTERS * self.N} nodes do not fit above port {self.BASE_PORT}")
        return self

    @property
    def params(self) -> CodingParams:
        return CodingParams(n=self.N, k=self.K)
