# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Post-hoc metrics over node scans and recorded retrievals."""

from collections.abc import Iterable, Mapping
from pathlib import Path

import pandas as pd
import pandera as pa
from pandera.typing import DataFrame, Series
from pydantic import BaseModel, Field

from scherbe.exceptions import UndefinedMetricError
from scherbe.metadata import FileMeta, RefCountTable
from scherbe.topology import Topology
from scherbe.wire import ScanReply

RETRIEVAL_COLUMNS = ["user", "file_name", "day", "hour", "duration_ms", "bytes"]


def consumed_bytes(scans: Iterable[ScanReply], *, include_index: bool = True) -> int:
    """Piece payload on all nodes, plus piece headers, FileMetas and the directory index."""
    total = 0
    for scan in scans:
        total += scan.piece_bytes
        if include_index:
            total += scan.header_bytes + scan.meta_bytes + scan.index_bytes
    return total


def dedup_ratio(scans: Iterable[ScanReply], *, include_index: bool = True) -> float:
    """Bytes of all stored files (every copy counted) over the bytes the system consumes for them.

    Raises:
        UndefinedMetricError: nothing is stored.

    """
    scans = list(scans)
    original = sum(scan.original_bytes for scan in scans)
    consumed = consumed_bytes(scans, include_index=include_index)
    if original == 0 or consumed == 0:
        raise UndefinedMetricError("no file is stored, the deduplication ratio is undefined")
    return original / consumed


def retrieval_frame(records: Iterable[Mapping[str, object]]) -> pd.DataFrame:
    return pd.DataFrame(list(records), columns=RETRIEVAL_COLUMNS)


def hourly_series(retrievals: pd.DataFrame) -> dict[int, float]:
    """Mean retrieval time per hour of day over all days and users."""
    if retrievals.empty:
        return {}
    means = retrievals.groupby("hour")["duration_ms"].mean().sort_index()
    return {int(hour): float(value) for hour, value in means.items()}


class ConsistencyReport(BaseModel):
    files: int = 0
    refcount_mismatches: int = Field(0, description="refs whose counted references differ from a recount over all FileMetas")
    orphan_pieces: int = Field(0, description="pieces no reference accounts for")
    missing_pieces: int = Field(0, description="pieces of referenced chunks that no node holds")
    charged_bytes: int = 0
    piece_bytes: int = 0

    @property
    def ok(self) -> bool:
        return not (self.refcount_mismatches or self.orphan_pieces or self.missing_pieces) and self.charged_bytes == self.piece_bytes


def check_consistency(topology: Topology, scans: Mapping[str, ScanReply], metas: Iterable[FileMeta]) -> ConsistencyReport:
    """Compare the directory against a recount from scratch and the pieces against the counted refs.

    `scans` must be detailed scans of every node.
    """
    metas = list(metas)
    directory = scans[topology.directory_address]
    counted = {entry.ref: entry.count for entry in directory.refcounts}
    recounted = RefCountTable.recount(metas).snapshot()
    mismatches = {ref for ref in counted.keys() | recounted.keys() if counted.get(ref) != recounted.get(ref)}

    expected = {(ref.chunk_id, index, member) for ref in counted for index, member in enumerate(topology.cluster(ref.cluster_id).members)}
    held = {(key.chunk_id, key.index, address) for address, scan in scans.items() for key in scan.pieces}
    return ConsistencyReport(
        files=len(metas),
        refcount_mismatches=len(mismatches),
        orphan_pieces=len(held - expected),
        missing_pieces=len(expected - held),
        charged_bytes=directory.charged_bytes,
        piece_bytes=sum(scan.piece_bytes for scan in scans.values()),
    )


class MetricsReport(BaseModel):
    """Outcome of one experiment."""

    binding_mode: str
    n: int
    k: int
    dedup_ratio: float
    avg_retrieval_ms: float | None = Field(None, description="request issue to file ready, None without retrievals")
    hourly_retrieval_ms: dict[int, float] = Field(default_factory=dict)
    daily_dedup: dict[int, float] = Field(default_factory=dict, description="cumulative ratio at the end of each trace day")
    original_bytes: int
    consumed_bytes: int
    piece_bytes: int
    index_bytes: int
    wire_bytes: int
    uploads: int = 0
    retrievals: int = 0
    deletes: int = 0
    failures: int = 0
    consistency: ConsistencyReport | None = None

    def to_row(self) -> dict[str, object]:
        return self.model_dump(exclude={"hourly_retrieval_ms", "daily_dedup", "consistency"})


class RunSummary(pa.DataFrameModel):
    """One row per experiment, the columns of `MetricsReport.to_row`."""

    binding_mode: Series[str] = pa.Field(isin=["CLB", "ULB", "MIXED"])
    n: Series[int] = pa.Field(ge=1)
    k: Series[int] = pa.Field(ge=1)
    dedup_ratio: Series[float] = pa.Field(gt=0)
    avg_retrieval_ms: Series[float] = pa.Field(nullable=True, ge=0)
    original_bytes: Series[int] = pa.Field(ge=0)
    consumed_bytes: Series[int] = pa.Field(ge=0)
    piece_bytes: Series[int] = pa.Field(ge=0)
    index_bytes: Series[int] = pa.Field(ge=0)
    wire_bytes: Series[int] = pa.Field(ge=0)
    uploads: Series[int] = pa.Field(ge=0)
    retrievals: Series[int] = pa.Field(ge=0)
    deletes: Series[int] = pa.Field(ge=0)
    failures: Series[int] = pa.Field(ge=0)

    class Config:
        strict = True
        coerce = True


def summary_frame(reports: Iterable[MetricsReport]) -> DataFrame[RunSummary]:
    frame = pd.DataFrame([report.to_row() for report in reports], columns=list(RunSummary.to_schema().columns))
    return RunSummary.validate(frame)  # type: ignore[return-value]


def write_report(report: MetricsReport, out_dir: Path) -> list[Path]:
    """Write summary, hourly and daily CSVs (header row first) into `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "summary.csv", out_dir / "hourly.csv", out_dir / "daily.csv"]
    summary_frame([report]).to_csv(paths[0], index=False)
    pd.DataFrame(sorted(report.hourly_retrieval_ms.items()), columns=["hour", "avg_retrieval_ms"]).to_csv(paths[1], index=False)
    pd.DataFrame(sorted(report.daily_dedup.items()), columns=["day", "dedup_ratio"]).to_csv(paths[2], index=False)
    return paths
