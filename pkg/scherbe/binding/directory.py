# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Placement directory: the single authority over cluster free space and chunk presence.

It owns the ClusterStates, the BindingPolicy, the presence index
(chunk id -> clusters holding it, each entry reserved or stored) and the global
RefCountTable. Binding a FileMeta resolves every entry to a cluster, charges the
erasure-expanded size of new chunks and adjusts the reference counts in one step.

Persistence is a RecordLog of change batches, one record per bind, release or confirm.
Each batch lists the resulting state of what it touched (reservations, drops, stored flags,
absolute reference counts, user assignments), so replay applies it without re-running any
policy. The log is compacted to one entry per live item once it outgrows the state.
"""

import itertools
import logging
from collections.abc import Iterable, Iterator, Sequence
from enum import IntEnum
from pathlib import Path

from pydantic import BaseModel, Field

from scherbe.core.buffers import ByteReader, ByteWriter
from scherbe.core.journal import RecordLog
from scherbe.erasure import CodingParams
from scherbe.exceptions import BindingError, LoggedCustomException, MalformedFrameError, MetadataError, ScherbeError
from scherbe.metadata import ChunkRef, FileMeta, RefCountTable, apply_refcounts, missing_chunks
from scherbe.metadata.codec import REF_SIZE, read_chunk_ref, write_chunk_ref

from .models import BindingMode, BindingPolicy, ClusterState
from .policy import clb_select, ulb_select

log = logging.getLogger(__name__)

LOCATION_ENTRY_SIZE = REF_SIZE + 1
"""serialized size of one presence index entry: chunk ref plus state byte."""

COMPACT_MIN_RECORDS = 4096
_BATCH = 1
_COMPACTION_BATCH_SIZE = 1024


class _Change(IntEnum):
    RESERVE = 1
    DROP = 2
    STORED = 3
    REFS = 4
    ASSIGN = 5


class Location(BaseModel):
    length: int = Field(ge=1, description="original chunk length")
    charged: int = Field(ge=0, description="bytes charged to the cluster")
    stored: bool = False


class BindResult(BaseModel):
    meta: FileMeta
    missing: list[ChunkRef]
    released: list[ChunkRef] = Field(default_factory=list)


class PlacementDirectory:
    """Cluster accounting plus presence index, optionally persisted as a change journal."""

    def __init__(
        self,
        clusters: Sequence[ClusterState],
        params: CodingParams,
        policy: BindingPolicy | None = None,
        journal_path: Path | None = None,
    ) -> None:
        if not clusters:
            raise BindingError("a placement directory needs at least one cluster")
        self.clusters = {cluster.cluster_id: cluster.model_copy() for cluster in clusters}
        self.params = params
        self.policy = policy or BindingPolicy()
        self.refcounts = RefCountTable()
        self._locations: dict[bytes, dict[int, Location]] = {}
        self.journal_path = Path(journal_path) if journal_path is not None else None
        self._log = RecordLog(self.journal_path) if self.journal_path is not None else None
        if self._log is not None:
            self._replay(self._log)
            if self._log.records > 2 * max(1, self._live_items()):
                self.compact()

    @property
    def cluster_list(self) -> list[ClusterState]:
        return [self.clusters[cluster_id] for cluster_id in sorted(self.clusters)]

    def cluster(self, cluster_id: int) -> ClusterState:
        try:
            return self.clusters[cluster_id]
        except KeyError as err:
            raise BindingError(f"unknown cluster {cluster_id}") from err

    def location(self, ref: ChunkRef) -> Location | None:
        return self._locations.get(ref.chunk_id, {}).get(ref.cluster_id)

    def holders(self, chunk_id: bytes) -> list[int]:
        return sorted(self._locations.get(chunk_id, {}))

    def lookup(self, user_id: str, chunk_id: bytes) -> int | None:
        """Cluster already holding `chunk_id` that `user_id` may reference, if any.

        CLB users may reference any cluster, ULB users only their assigned ones.
        """
        holders = self.holders(chunk_id)
        if not holders:
            return None
        if self.policy.mode_of(user_id) is BindingMode.CLB:
            return holders[0]
        for cluster_id in reversed(self.policy.user_assignments.get(user_id, [])):
            if cluster_id in holders:
                return cluster_id
        return None

    def _select(self, user_id: str, length: int) -> int:
        clusters = self.cluster_list
        if self.policy.mode_of(user_id) is BindingMode.ULB:
            return ulb_select(user_id, self.policy, clusters, length, self.params)
        return clb_select(length, clusters, self.params)

    def _reserve(self, chunk_id: bytes, cluster_id: int, length: int) -> None:
        cluster = self.clusters[cluster_id]
        charged = cluster.n * self.params.piece_len(length)
        cluster.used += charged
        self._locations.setdefault(chunk_id, {})[cluster_id] = Location(length=length, charged=charged)

    def _drop(self, ref: ChunkRef) -> None:
        held = self._locations.get(ref.chunk_id, {})
        location = held.pop(ref.cluster_id, None)
        if location is not None:
            self.clusters[ref.cluster_id].used -= location.charged
        if not held:
            self._locations.pop(ref.chunk_id, None)

    def bind(self, user_id: str, meta: FileMeta, lengths: Sequence[int], previous: FileMeta | None = None) -> BindResult:
        """Resolve the placement of every entry of `meta` and account for it.

        Entries that already name a cluster holding the chunk keep it, chunks the user may
        reference elsewhere are reused, all others are placed by the user's binding mode.
        Reference counts go up for `meta` and down for `previous` (the copy it replaces).

        Raises:
            MetadataError: lengths do not match the entries, or a chunk needing a cluster comes without length.
            CapacityExhaustedError: a new chunk fits nowhere; no reservation of this call survives.

        """
        if lengths and len(lengths) != len(meta.chunks):
            raise MetadataError(f"{len(meta.chunks)} chunks but {len(lengths)} lengths for {meta.file_name}")
        if lengths and (any(length < 1 for length in lengths) or sum(lengths) != meta.total_len):
            raise MetadataError(f"chunk lengths of {meta.file_name} do not add up to {meta.total_len}")
        length_of = dict(zip((ref.chunk_id for ref in meta.chunks), lengths))

        assigned_before = list(self.policy.user_assignments[user_id]) if user_id in self.policy.user_assignments else None
        resolved: dict[bytes, int] = {}
        reserved: list[ChunkRef] = []
        counts_before: dict[ChunkRef, int] = {}
        try:
            for ref in meta.chunks:
                if ref.chunk_id in resolved:
                    continue
                if ref.placed and ref.cluster_id in self._locations.get(ref.chunk_id, {}):
                    resolved[ref.chunk_id] = ref.cluster_id
                    continue
                cluster_id = self.lookup(user_id, ref.chunk_id)
                if cluster_id is None:
                    if ref.chunk_id not in length_of:
                        raise MetadataError(f"length of chunk {ref.chunk_id.hex()} in {meta.file_name} is unknown")
                    cluster_id = self._select(user_id, length_of[ref.chunk_id])
                    self._reserve(ref.chunk_id, cluster_id, length_of[ref.chunk_id])
                    reserved.append(ChunkRef(chunk_id=ref.chunk_id, cluster_id=cluster_id))
                resolved[ref.chunk_id] = cluster_id

            bound = meta.with_placements(resolved[ref.chunk_id] for ref in meta.chunks)
            replaced = previous.distinct_refs() if previous is not None else []
            counts_before = {ref: self.refcounts.count(ref) for ref in itertools.chain(bound.distinct_refs(), replaced)}
            apply_refcounts(self.refcounts, bound, 1)
            released = apply_refcounts(self.refcounts, previous, -1) if previous is not None else set()
        except (ScherbeError, LoggedCustomException):
            for ref, count in counts_before.items():
                self.refcounts.adjust(ref, count - self.refcounts.count(ref))
            for ref in reserved:
                self._drop(ref)
            if assigned_before is None:
                self.policy.user_assignments.pop(user_id, None)
            else:
                self.policy.user_assignments[user_id] = assigned_before
            raise

        for ref in released:
            self._drop(ref)
        writer = ByteWriter()
        assigned = self.policy.user_assignments.get(user_id)
        if assigned is not None and assigned != assigned_before:
            _write_assign(writer, user_id, assigned)
        for ref in reserved:
            _write_reserve(writer, ref, self.location(ref))
        for ref in counts_before:
            writer.u8(_Change.REFS)
            write_chunk_ref(writer, ref)
            writer.u32(self.refcounts.count(ref))
        _write_drops(writer, released)
        self._commit(writer)

        stored = {ref.chunk_id for ref in bound.distinct_refs() if (location := self.location(ref)) is not None and location.stored}
        result = BindResult(meta=bound, missing=missing_chunks(bound, stored), released=sorted(released, key=repr))
        log.debug(
            "Bound file",
            extra={
                "user": user_id,
                "file": meta.file_name,
                "chunks": len(meta.chunks),
                "missing": len(result.missing),
                "released": len(released),
            },
        )
        return result

    def release(self, meta: FileMeta) -> list[ChunkRef]:
        """Drop one reference per distinct chunk of a deleted file, return the refs whose pieces must go."""
        released = apply_refcounts(self.refcounts, meta, -1)
        for ref in released:
            self._drop(ref)
        writer = ByteWriter()
        for ref in meta.distinct_refs():
            writer.u8(_Change.REFS)
            write_chunk_ref(writer, ref)
            writer.u32(self.refcounts.count(ref))
        _write_drops(writer, released)
        self._commit(writer)
        return sorted(released, key=repr)

    def confirm(self, ref: ChunkRef) -> bool:
        """Mark a chunk as stored on its cluster; False when nobody references it anymore."""
        location = self.location(ref)
        if location is None:
            return False
        if not location.stored:
            location.stored = True
            writer = ByteWriter().u8(_Change.STORED)
            write_chunk_ref(writer, ref)
            self._commit(writer)
        return True


    def index_bytes(self) -> int:
        return LOCATION_ENTRY_SIZE * sum(len(held) for held in self._locations.values())

    def used_bytes(self) -> int:
        return sum(cluster.used for cluster in self.clusters.values())

    def stored_refs(self) -> Iterable[ChunkRef]:
        for chunk_id, held in self._locations.items():
            for cluster_id, location in held.items():
                if location.stored:
                    yield ChunkRef(chunk_id=chunk_id, cluster_id=cluster_id)

    def _live_items(self) -> int:
        return sum(len(held) for held in self._locations.values()) + len(self.refcounts) + len(self.policy.user_assignments)

    def _commit(self, writer: ByteWriter) -> None:
        if self._log is None or not len(writer):
            return
        self._log.append(_BATCH, writer.getvalue())
        if self._log.records > max(COMPACT_MIN_RECORDS, 4 * self._live_items()):
            self.compact()

    def _state_batches(self) -> Iterator[tuple[int, bytes]]:
        changes: list[bytes] = []
        for user_id, assigned in sorted(self.policy.user_assignments.items()):
            changes.append(_write_assign(ByteWriter(), user_id, assigned).getvalue())
        for chunk_id, held in self._locations.items():
            for cluster_id, location in held.items():
                changes.append(_write_reserve(ByteWriter(), ChunkRef(chunk_id=chunk_id, cluster_id=cluster_id), location).getvalue())
        for ref, count in self.refcounts.snapshot().items():
            writer = ByteWriter().u8(_Change.REFS)
            write_chunk_ref(writer, ref)
            changes.append(writer.u32(count).getvalue())
        for start in range(0, len(changes), _COMPACTION_BATCH_SIZE):
            yield _BATCH, b"".join(changes[start : start + _COMPACTION_BATCH_SIZE])

    def compact(self) -> None:
        """Rewrite the journal with the current state only."""
        if self._log is None:
            return
        self._log.rewrite(self._state_batches())
        log.info("Compacted directory journal", extra={"journal": str(self.journal_path), "records": self._log.records})

    def _replay(self, journal: RecordLog) -> None:
        for index, (tag, body) in enumerate(journal.replay()):
            try:
                if tag != _BATCH:
                    raise MalformedFrameError(f"unknown journal record tag {tag}")
                self._apply(ByteReader(body))
            except (MalformedFrameError, ValueError) as err:
                log.error(
                    "Skipping unreadable directory record", extra={"journal": str(self.journal_path), "record": index, "error": str(err)}
                )

        log.info("Loaded placement directory", extra={"journal": str(self.journal_path), "chunks": len(self._locations)})

    def _apply(self, reader: ByteReader) -> None:
        while reader.remaining:
            change = _Change(reader.u8())
            if change is _Change.ASSIGN:
                user_id = reader.text()
                self.policy.user_assignments[user_id] = [reader.u16() for _ in range(reader.u16())]
                continue
            ref = read_chunk_ref(reader)
            if change is _Change.RESERVE:
                length, charged, stored = reader.u64(), reader.u64(), bool(reader.u8())
                if ref.cluster_id not in self.clusters:
                    log.warning("Journal names an unknown cluster", extra={"cluster": ref.cluster_id})
                    continue
                self._drop(ref)
                self.clusters[ref.cluster_id].used += charged
                self._locations.setdefault(ref.chunk_id, {})[ref.cluster_id] = Location(length=length, charged=charged, stored=stored)
            elif change is _Change.DROP:
                self._drop(ref)
            elif change is _Change.STORED:
                if (location := self.location(ref)) is not None:
                    location.stored = True
            else:
                count = reader.u32()
                self.refcounts.adjust(ref, count - self.refcounts.count(ref))


def _write_assign(writer: ByteWriter, user_id: str, assigned: Sequence[int]) -> ByteWriter:
    writer.u8(_Change.ASSIGN).text(user_id).u16(len(assigned))
    for cluster_id in assigned:
        writer.u16(cluster_id)
    return writer


def _write_reserve(writer: ByteWriter, ref: ChunkRef, location: Location | None) -> ByteWriter:
    if location is None:
        raise BindingError(f"no reservation for {ref!r}")
    writer.u8(_Change.RESERVE)
    write_chunk_ref(writer, ref)
    return writer.u64(location.length).u64(location.charged).u8(int(location.stored))


def _write_drops(writer: ByteWriter, released: Iterable[ChunkRef]) -> None:
    for ref in sorted(released, key=repr):
        writer.u8(_Change.DROP)
        write_chunk_ref(writer, ref)
