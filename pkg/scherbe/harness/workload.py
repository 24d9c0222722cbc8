# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Synthetic multi-user workloads with tunable redundancy and a diurnal request trace.

File content is assembled from segments: a segment is drawn from a small pool shared by
all users with probability `shared_fraction`, repeats an earlier segment of the same file
with probability `repeat_fraction` and is fresh random data otherwise. Only the recipe is
kept; `file_content` regenerates the bytes from the seed.
"""

import logging
import math
from collections import defaultdict
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from scherbe.exceptions import ConfigError

log = logging.getLogger(__name__)

SEGMENT_SIZE = 32 * 1024
DAY = 86400.0
# relative request volume per hour of day, quiet from 00:00 to 08:00
HOURLY_LOAD = np.array([0.15] * 8 + [1.0 + 0.6 * math.sin(math.pi * (hour - 8) / 16) for hour in range(8, 24)])
# a file is only requested this long after its upload and before its deletion
_SETTLE = 600.0


class FileSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    user: str
    file_name: str
    size: int = Field(ge=1)
    seed: int = Field(ge=0)


class TraceEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    at: float = Field(ge=0, description="seconds since the start of the trace")
    op: Literal["put", "get", "rm"]
    user: str
    file_name: str

    @property
    def day(self) -> int:
        return int(self.at // DAY)

    @property
    def hour(self) -> int:
        return int(self.at % DAY // 3600)


class WorkloadSpec(BaseModel):
    users: int = Field(10, ge=1)
    files_per_user: int = Field(50, ge=1)
    min_file_size: int = Field(64 * 1024, ge=1)
    max_file_size: int = Field(4 * 1024 * 1024, ge=1)
    repeat_fraction: float = Field(0.05, ge=0, le=1)
    shared_fraction: float = Field(0.3, ge=0, le=1)
    shared_pool: int = Field(16, ge=1, description="distinct shared segments")
    days: int = Field(21, ge=1)
    gets_per_user: int = Field(100, ge=0)
    bursts_per_day: int = Field(2, ge=0, description="moments at which several users fetch at once")
    crowd_size: int = Field(4, ge=1)
    delete_fraction: float = Field(0.0, ge=0, le=1)
    seed: int = Field(0, ge=0)
    files: list[FileSpec] = Field(default_factory=list)
    trace: list[TraceEvent] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_sizes(self) -> "WorkloadSpec":
        if self.min_file_size > self.max_file_size:
            raise ValueError(f"min_file_size {self.min_file_size} exceeds max_file_size {self.max_file_size}")
        return self

    @property
    def user_ids(self) -> list[str]:
        return [user_name(index) for index in range(self.users)]

    def file(self, user: str, file_name: str) -> FileSpec:
        for spec in self.files:
            if spec.user == user and spec.file_name == file_name:
                return spec
        raise ConfigError(f"workload has no file {user}/{file_name}")

    def save(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "WorkloadSpec":
        try:
            return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValidationError) as err:
            raise ConfigError(f"can not load workload {path}: {err}") from err


def user_name(index: int) -> str:
    return f"user{index:02d}"


@lru_cache(maxsize=256)
def shared_segment(seed: int, index: int) -> bytes:
    return np.random.default_rng([seed, 1, index]).bytes(SEGMENT_SIZE)


def file_content(workload: WorkloadSpec, file: FileSpec) -> bytes:
    """Bytes of `file`, identical for identical seeds."""
    rng = np.random.default_rng([workload.seed, 2, file.seed])
    segments: list[bytes] = []
    for _ in range(math.ceil(file.size / SEGMENT_SIZE)):
        draw = rng.random()
        if draw < workload.shared_fraction:
            segments.append(shared_segment(workload.seed, int(rng.integers(workload.shared_pool))))
        elif draw < workload.shared_fraction + workload.repeat_fraction and segments:
            segments.append(segments[int(rng.integers(len(segments)))])
        else:
            segments.append(rng.bytes(SEGMENT_SIZE))
    return b"".join(segments)[: file.size]


def _moment(rng: np.random.Generator, day: int) -> float:
    hour = int(rng.choice(24, p=HOURLY_LOAD / HOURLY_LOAD.sum()))
    return round(day * DAY + hour * 3600 + float(rng.uniform(0, 3600)), 3)


def _alive(lifetimes: list[tuple[float, float, str]], at: float) -> list[str]:
    return [name for put_at, rm_at, name in lifetimes if put_at + _SETTLE <= at < rm_at - _SETTLE]


def generate_workload(spec: WorkloadSpec) -> WorkloadSpec:
    """Fill in files and the request trace of `spec`; the same seed gives the same workload.

    Uploads spread evenly over the days, retrievals follow HOURLY_LOAD, and every day has
    `bursts_per_day` moments at which `crowd_size` users fetch at the same instant.
    """
    rng = np.random.default_rng(spec.seed)
    end = spec.days * DAY
    files: list[FileSpec] = []
    events: list[TraceEvent] = []
    lifetimes: dict[str, list[tuple[float, float, str]]] = defaultdict(list)
    low, high = math.log(spec.min_file_size), math.log(spec.max_file_size)
    for user in spec.user_ids:
        for index in range(spec.files_per_user):
            name = f"file{index:04d}.bin"
            files.append(FileSpec(user=user, file_name=name, size=round(math.exp(rng.uniform(low, high))), seed=int(rng.integers(2**32))))
            put_at = _moment(rng, index * spec.days // spec.files_per_user)
            events.append(TraceEvent(at=put_at, op="put", user=user, file_name=name))
            rm_at = end + DAY
            if rng.random() < spec.delete_fraction:
                rm_at = min(put_at + float(rng.uniform(2 * _SETTLE, 3 * DAY)), end - 1)
                events.append(TraceEvent(at=rm_at, op="rm", user=user, file_name=name))
            lifetimes[user].append((put_at, rm_at, name))

    for user in spec.user_ids:
        for _ in range(spec.gets_per_user):
            at = _moment(rng, int(rng.integers(spec.days)))
            if candidates := _alive(lifetimes[user], at):
                events.append(TraceEvent(at=at, op="get", user=user, file_name=candidates[int(rng.integers(len(candidates)))]))

    crowd = min(spec.crowd_size, spec.users)
    for day in range(spec.days):
        for _ in range(spec.bursts_per_day):
            at = _moment(rng, day)
            for user_index in sorted(rng.choice(spec.users, size=crowd, replace=False)):
                user = user_name(int(user_index))
                if candidates := _alive(lifetimes[user], at):
                    events.append(TraceEvent(at=at, op="get", user=user, file_name=candidates[int(rng.integers(len(candidates)))]))

    order = {"put": 0, "get": 1, "rm": 2}
    events.sort(key=lambda event: (event.at, event.user, order[event.op]))
    log.info("Generated workload", extra={"users": spec.users, "files": len(files), "events": len(events), "seed": spec.seed})
    return spec.model_copy(update={"files": files, "trace": events})
