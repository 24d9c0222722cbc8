# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Replaying a workload against a deployment and sweeping the coding parameters."""

import asyncio
import logging
from collections import defaultdict
from collections.abc import Callable, Iterable
from pathlib import Path
from typing import Any

from pandera.typing import DataFrame
from tqdm import tqdm

from scherbe.client import ClientSettings, StorageClient
from scherbe.exceptions import ConfigError, LoggedCustomException, ScherbeError, UndefinedMetricError
from scherbe.wire import run_simulation

from .metrics import (
    MetricsReport,
    RunSummary,
    check_consistency,
    consumed_bytes,
    dedup_ratio,
    hourly_series,
    retrieval_frame,
    summary_frame,
)
from .settings import ExperimentSettings
from .topology import RunningTopology, build_topology, spawn_topology
from .workload import TraceEvent, WorkloadSpec, file_content, generate_workload

log = logging.getLogger(__name__)


class _Replay:  # pylint: disable=too-many-instance-attributes
    """State of one replay: a device per user, counters and retrieval records."""

    def __init__(self, settings: ExperimentSettings, workload: WorkloadSpec, running: RunningTopology) -> None:
        self.settings = settings
        self.workload = workload
        self.running = running
        self.loop = asyncio.get_running_loop()
        self.start = self.loop.time()
        client_settings = ClientSettings(FETCH_WINDOW=settings.FETCH_WINDOW, CACHE_BUDGET=0, CHUNKING=settings.CHUNKING)
        self.clients = {
            user: StorageClient(
                user,
                running.topology.switch_of(user),
                running.transport(f"device-{user}"),
                running.topology,
                settings=client_settings,
                clock=self._clock if settings.TRANSPORT == "sim" else None,
            )
            for user in workload.user_ids
        }
        self.harness = running.transport("harness")
        self.counts: defaultdict[str, int] = defaultdict(int)
        self.retrievals: list[dict[str, Any]] = []
        self.daily_dedup: dict[int, float] = {}

    def _clock(self) -> int:
        return int(self.loop.time() * 1000)

    async def _event(self, event: TraceEvent, before: asyncio.Task[None] | None) -> None:
        if before is not None:
            await asyncio.wait([before])
        delay = self.start + event.at * self.settings.TRACE_TIME_SCALE - self.loop.time()
        if delay > 0:
            await asyncio.sleep(delay)
        client = self.clients[event.user]
        try:
            if event.op == "put":
                data = file_content(self.workload, self.workload.file(event.user, event.file_name))
                await client.upload_bytes(event.file_name, data)
                self.counts["uploads"] += 1
            elif event.op == "get":
                data, report = await client.retrieve_file(event.file_name)
                self.counts["retrievals"] += 1
                self.retrievals.append(
                    {
                        "user": event.user,
                        "file_name": event.file_name,
                        "day": event.day,
                        "hour": event.hour,
                        "duration_ms": report.duration_ms,
                        "bytes": len(data),
                    }
                )
            else:
                await client.delete_file(event.file_name)
                self.counts["deletes"] += 1
        except (ScherbeError, LoggedCustomException) as err:
            self.counts["failures"] += 1
            log.warning("Trace event failed", extra={"op": event.op, "user": event.user, "file": event.file_name, "error": repr(err)})

    async def replay_day(self, events: Iterable[TraceEvent]) -> None:
        """Events of one user run in trace order, different users run concurrently."""
        last: dict[str, asyncio.Task[None]] = {}
        tasks = []
        for event in events:
            task = asyncio.create_task(self._event(event, last.get(event.user)))
            last[event.user] = task
            tasks.append(task)
        await asyncio.gather(*tasks)

    async def run(self) -> MetricsReport:
        by_day: defaultdict[int, list[TraceEvent]] = defaultdict(list)
        for event in self.workload.trace:
            by_day[event.day].append(event)
        for day in range(self.workload.days):
            await self.replay_day(by_day.get(day, []))
            try:
                self.daily_dedup[day + 1] = dedup_ratio((await self.running.scan(self.harness)).values())
            except UndefinedMetricError:
                pass
            log.info("Replayed day", extra={"day": day + 1, "events": len(by_day.get(day, [])), **self.counts})
        return await self.report()

    async def report(self) -> MetricsReport:
        scans = await self.running.scan(self.harness, detail=self.settings.CHECK_CONSISTENCY)
        consistency = None
        if self.settings.CHECK_CONSISTENCY:
            consistency = check_consistency(self.running.topology, scans, await self.running.stored_metas(self.harness))
            if not consistency.ok:
                log.warning("Inconsistent store after replay", extra=consistency.model_dump())
        retrievals = retrieval_frame(self.retrievals)
        settings = self.settings
        return MetricsReport(
            binding_mode="MIXED" if settings.MIXED_ULB_FRACTION is not None else settings.BINDING_MODE.value,
            n=settings.N,
            k=settings.K,
            dedup_ratio=dedup_ratio(scans.values()),
            avg_retrieval_ms=None if retrievals.empty else float(retrievals["duration_ms"].mean()),
            hourly_retrieval_ms=hourly_series(retrievals),
            daily_dedup=self.daily_dedup,
            original_bytes=sum(scan.original_bytes for scan in scans.values()),
            consumed_bytes=consumed_bytes(scans.values()),
            piece_bytes=sum(scan.piece_bytes for scan in scans.values()),
            index_bytes=sum(scan.header_bytes + scan.meta_bytes + scan.index_bytes for scan in scans.values()),
            wire_bytes=self.running.wire_bytes,
            uploads=self.counts["uploads"],
            retrievals=self.counts["retrievals"],
            deletes=self.counts["deletes"],
            failures=self.counts["failures"],
            consistency=consistency,
        )


async def replay(settings: ExperimentSettings, workload: WorkloadSpec) -> MetricsReport:
    """Bring up the deployment, replay `workload` and scan the result; needs a running loop."""
    topology = build_topology(settings, workload.user_ids)
    async with spawn_topology(settings, topology) as running:
        return await _Replay(settings, workload, running).run()


def run_experiment(settings: ExperimentSettings, workload: WorkloadSpec | None = None) -> MetricsReport:
    """Run one experiment; deterministic on the simulator for equal settings and seeds.

    Raises:
        ConfigError: settings, topology or workload are inconsistent; raised before any traffic.
        UndefinedMetricError: nothing was stored.

    """
    workload = workload or generate_workload(settings.WORKLOAD.spec())
    if not workload.trace:
        raise ConfigError("workload has no trace, generate it first")
    log.info(
        "Running experiment",
        extra={"mode": settings.BINDING_MODE.value, "n": settings.N, "k": settings.K, "transport": settings.TRANSPORT},
    )

    if settings.TRANSPORT == "sim":
        return run_simulation(replay(settings, workload))
    return asyncio.run(replay(settings, workload))


def sweep_k(
    settings: ExperimentSettings,
    k_values: Iterable[int],
    workload: WorkloadSpec | None = None,
    out: Path | None = None,
    run: Callable[[ExperimentSettings, WorkloadSpec], MetricsReport] = run_experiment,
) -> DataFrame[RunSummary]:
    """One experiment per k with everything else fixed, as a validated table (optionally CSV).

    Raises:
        ConfigError: a k exceeds N.

    """
    k_values = list(k_values)
    if bad := [k for k in k_values if not 1 <= k <= settings.N]:
        raise ConfigError(f"k values {bad} outside 1..{settings.N}")
    workload = workload or generate_workload(settings.WORKLOAD.spec())
    reports = []
    for k in tqdm(k_values, desc="Sweeping k"):
        reports.append(run(settings.model_copy(update={"K": k}), workload))
    table = summary_frame(reports)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False)
        log.info("Wrote sweep", extra={"path": str(out), "rows": len(table)})
    return table
