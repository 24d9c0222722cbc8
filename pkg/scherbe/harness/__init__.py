# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Experiment driver: deployments, synthetic workloads, replay and metrics."""

from .metrics import (
    ConsistencyReport,
    MetricsReport,
    RunSummary,
    check_consistency,
    consumed_bytes,
    dedup_ratio,
    hourly_series,
    summary_frame,
    write_report,
)

from .runner import replay, run_experiment, sweep_k
from .settings import ExperimentSettings, LatencySettings, WorkloadSettings
from .topology import RunningTopology, build_topology, spawn_topology
from .workload import FileSpec, TraceEvent, WorkloadSpec, file_content, generate_workload

__all__ = [
    "ConsistencyReport",
    "ExperimentSettings",
    "FileSpec",
    "LatencySettings",
    "MetricsReport",
    "RunSummary",
    "RunningTopology",
    "TraceEvent",
    "WorkloadSettings",
    "WorkloadSpec",
    "build_topology",
    "check_consistency",
    "consumed_bytes",
    "dedup_ratio",
    "file_content",
    "generate_workload",
    "hourly_series",
    "replay",
    "run_experiment",
    "spawn_topology",
    "summary_frame",
    "sweep_k",
    "write_report",
]
