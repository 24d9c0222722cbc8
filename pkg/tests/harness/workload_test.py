# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from collections import Counter

import pytest
from pydantic import ValidationError

from scherbe.chunking import chunk_stream
from scherbe.exceptions import ConfigError
from scherbe.harness import TraceEvent, WorkloadSpec, file_content, generate_workload
from scherbe.harness.workload import DAY, HOURLY_LOAD


@pytest.fixture
def workload() -> WorkloadSpec:
    return generate_workload(
        WorkloadSpec(
            users=4,
            files_per_user=6,
            min_file_size=4096,
            max_file_size=128 * 1024,
            days=3,
            gets_per_user=40,
            bursts_per_day=2,
            crowd_size=3,
            seed=3,
        )

    )


def test_same_seed_same_workload(workload):
    assert generate_workload(workload.model_copy(update={"files": [], "trace": []})) == workload
    assert generate_workload(WorkloadSpec(users=4, files_per_user=6, days=3, seed=4)).files != workload.files


def test_files(workload):
    assert len(workload.files) == 24
    assert {spec.user for spec in workload.files} == {"user00", "user01", "user02", "user03"}
    assert all(4096 <= spec.size <= 128 * 1024 for spec in workload.files)
    assert workload.file("user01", "file0002.bin").user == "user01"
    with pytest.raises(ConfigError):
        workload.file("user01", "nope.bin")


def test_trace_is_ordered_and_gets_follow_puts(workload):
    trace = workload.trace
    assert [event.at for event in trace] == sorted(event.at for event in trace)
    assert all(event.at < workload.days * DAY for event in trace)
    put_at = {(event.user, event.file_name): event.at for event in trace if event.op == "put"}
    assert len(put_at) == 24
    assert all(event.at > put_at[(event.user, event.file_name)] for event in trace if event.op == "get")


def test_bursts_share_an_instant(workload):
    sizes = Counter(event.at for event in workload.trace if event.op == "get")
    assert max(sizes.values()) == 3


def test_gets_follow_the_diurnal_load():
    spec = generate_workload(WorkloadSpec(users=5, files_per_user=2, days=4, gets_per_user=400, bursts_per_day=0, seed=1))
    gets = [event for event in spec.trace if event.op == "get"]
    quiet = sum(1 for event in gets if event.hour < 8) / len(gets)
    assert quiet < 2 * HOURLY_LOAD[:8].sum() / HOURLY_LOAD.sum()


def test_deletes_end_the_lifetime():
    spec = generate_workload(WorkloadSpec(users=3, files_per_user=5, days=3, gets_per_user=50, delete_fraction=1.0, seed=2))
    removed = {(event.user, event.file_name): event.at for event in spec.trace if event.op == "rm"}
    assert len(removed) == 15
    assert all(event.at < removed[(event.user, event.file_name)] for event in spec.trace if event.op == "get")


def test_trace_event_day_and_hour():
    event = TraceEvent(at=DAY + 3 * 3600 + 5, op="get", user="u", file_name="f")
    assert (event.day, event.hour) == (1, 3)


def test_file_content_is_reproducible(workload):
    spec = workload.files[0]
    data = file_content(workload, spec)
    assert len(data) == spec.size
    assert file_content(workload, spec) == data
    assert file_content(workload, workload.files[1]) != data


def test_shared_fraction_controls_redundancy():
    base = {"users": 2, "files_per_user": 2, "min_file_size": 256 * 1024, "max_file_size": 256 * 1024, "repeat_fraction": 0.0}
    shared = generate_workload(WorkloadSpec(**base, shared_fraction=1.0, shared_pool=2))
    fresh = generate_workload(WorkloadSpec(**base, shared_fraction=0.0))

    def distinct_share(spec):
        ids = [chunk.id for file in spec.files for chunk in chunk_stream(file_content(spec, file))]
        return len(set(ids)) / len(ids)

    assert distinct_share(shared) < 0.5
    assert distinct_share(fresh) == 1.0


def test_save_and_load(tmp_path, workload):
    path = tmp_path / "workload.json"
    workload.save(path)
    assert WorkloadSpec.load(path) == workload
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        WorkloadSpec.load(path)


def test_invalid_sizes():
    with pytest.raises(ValidationError):
        WorkloadSpec(min_file_size=10, max_file_size=5)
