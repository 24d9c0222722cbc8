# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""End-device logic: deduplicating upload, first-k retrieval and meta synchronisation."""

import asyncio
import itertools
import logging
import time
from collections.abc import Callable, Coroutine
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, Field

from scherbe.binding import ClusterState
from scherbe.chunking import Chunk, chunk_stream
from scherbe.erasure import CodedPiece, CodingParams, decode_chunk
from scherbe.exceptions import (
    ConfigError,
    CorruptChunkError,
    DigestMismatchError,
    ErasureCodingError,
    LoggedCustomException,
    MalformedFrameError,
    MetadataError,
    NotFoundError,
    RemoteError,
    ScherbeError,
    TransportError,
    UnrecoverableChunkError,
)
from scherbe.metadata import UNPLACED, ChunkRef, FileMeta, build_file_meta, sync_meta
from scherbe.topology import Topology
from scherbe.wire import (
    DeleteAck,
    DeleteFile,
    FileList,
    GetMeta,
    GetPiece,
    ListFiles,
    Message,
    MetaReply,
    MissingList,
    PieceReply,
    StoreAck,
    StoreChunk,
    StoreMeta,
    Transport,
)

from .cache import LocalCache
from .settings import ClientSettings

log = logging.getLogger(__name__)

ReplyT = TypeVar("ReplyT", bound=Message)


class UploadReport(BaseModel):
    file_name: str
    total_len: int
    chunks_total: int
    chunks_unique: int
    chunks_missing: int
    chunk_bytes_sent: int = Field(description="payload bytes of the uploaded missing chunks")
    wire_bytes_sent: int = Field(description="framed bytes the transport sent during the upload")
    accepted: bool = Field(True, description="False when the switching node kept a newer copy")


class RetrievalReport(BaseModel):
    file_name: str
    total_len: int
    chunks_total: int
    chunks_cached: int
    chunks_fetched: int
    started_at: float = Field(description="loop time in seconds when the request was issued")
    duration_ms: float = Field(description="request issue to file ready")
    wire_bytes_received: int


class SyncReport(BaseModel):
    pushed: list[str] = Field(default_factory=list)
    pulled: list[str] = Field(default_factory=list)
    in_sync: list[str] = Field(default_factory=list)
    dropped: list[str] = Field(default_factory=list, description="local copies whose chunks exist on neither side")


def _wall_clock_ms() -> int:
    return int(time.time() * 1000)


class StorageClient:  # pylint: disable=too-many-instance-attributes
    """One user on one device, talking to its switching node and the coding and storage nodes."""

    # pylint: disable-next=too-many-positional-arguments
    def __init__(
        self,
        user_id: str,
        switch: str,
        transport: Transport,
        topology: Topology,
        cache: LocalCache | None = None,
        settings: ClientSettings | None = None,
        clock: Callable[[], int] | None = None,
    ) -> None:
        self.user_id = user_id
        self.switch = switch
        self.transport = transport
        self.settings = settings or ClientSettings()
        self.cache = cache if cache is not None else LocalCache(self.settings.CACHE_BUDGET)
        self.params = topology.params
        self.clusters = {cluster.cluster_id: cluster for cluster in topology.cluster_states()}
        self.clock = clock or _wall_clock_ms
        self._stragglers: set[asyncio.Task[Any]] = set()

    async def _call(self, dst: str, message: Message, expected: type[ReplyT]) -> ReplyT:
        """Request with the retry budget applied to transport failures."""
        for attempt in range(self.settings.RETRIES + 1):
            try:
                return await self.transport.call(dst, message, expected, self.settings.REQUEST_TIMEOUT)
            except TransportError as err:
                if attempt == self.settings.RETRIES:
                    raise
                log.info("Retrying request", extra={"dst": dst, "msg_type": type(message).__name__, "attempt": attempt, "error": str(err)})
        raise TransportError(f"no attempt to reach {dst}")

    def _cluster(self, cluster_id: int) -> ClusterState:
        try:
            return self.clusters[cluster_id]
        except KeyError as err:
            raise ConfigError(f"cluster {cluster_id} is not in the topology") from err

    # upload

    async def upload_file(self, path: Path, file_name: str | None = None) -> UploadReport:
        path = Path(path)
        return await self.upload_bytes(file_name or path.name, path.read_bytes())

    async def upload_bytes(self, file_name: str, data: bytes) -> UploadReport:
        """Chunk `data`, negotiate the missing chunks with the switching node and upload only those.

        Raises:
            TransportError: a node stayed unreachable within the retry budget.
            ScherbeError: a node rejected the meta or a chunk.

        """
        chunks = chunk_stream(data, self.settings.CHUNKING.params)
        meta = build_file_meta(self.user_id, file_name, chunks, [UNPLACED] * len(chunks), self.clock())
        sent_before = self.transport.bytes_sent
        store = StoreMeta(user=self.user_id, meta=meta, chunk_lengths=[c.length for c in chunks])
        reply = await self._call(self.switch, store, MissingList)
        chunk_bytes = 0
        if reply.accepted:
            if len(reply.placements) != len(chunks):
                raise MalformedFrameError(f"{len(reply.placements)} placements for {len(chunks)} chunks of {file_name}")
            bound = meta.with_placements(reply.placements)
            payloads = {chunk.id: chunk.payload for chunk in chunks}
            chunk_bytes = sum(len(payloads[ref.chunk_id]) for ref in reply.missing)
            await self._bounded(
                [self._store_chunk(ref, payloads[ref.chunk_id]) for ref in reply.missing],
                self.settings.UPLOAD_WINDOW,
            )
            self.cache.put_meta(bound)
        else:
            stored = await self._call(self.switch, GetMeta(user=self.user_id, file_name=file_name), MetaReply)
            if stored.meta is not None:
                self.cache.put_meta(stored.meta)
            log.info("Switching node holds a newer copy", extra={"user": self.user_id, "file": file_name})
        self._cache_chunks(chunks)

        report = UploadReport(
            file_name=file_name,
            total_len=len(data),
            chunks_total=len(chunks),
            chunks_unique=len(meta.distinct_refs()),
            chunks_missing=len(reply.missing),
            chunk_bytes_sent=chunk_bytes,
            wire_bytes_sent=self.transport.bytes_sent - sent_before,
            accepted=reply.accepted,
        )
        log.info("Uploaded file", extra={"user": self.user_id, **report.model_dump()})
        return report

    def _cache_chunks(self, chunks: list[Chunk]) -> None:
        for chunk in chunks:
            self.cache.put(chunk.payload, chunk.id)

    async def _store_chunk(self, ref: ChunkRef, payload: bytes) -> None:
        coding = self._cluster(ref.cluster_id).coding_member(ref.chunk_id)
        ack = await self._call(coding, StoreChunk(chunk_id=ref.chunk_id, cluster_id=ref.cluster_id, payload=payload), StoreAck)
        if not ack.kept:
            log.info("Chunk was released while uploading", extra={"chunk": ref.chunk_id.hex()})

    @staticmethod
    async def _bounded(coros: list[Coroutine[Any, Any, Any]], window: int) -> list[Any]:
        """Run `coros` with at most `window` at a time; the first failure cancels the rest."""
        semaphore = asyncio.Semaphore(window)

        async def limited(coro: Coroutine[Any, Any, Any]) -> Any:
            async with semaphore:
                return await coro

        tasks = [asyncio.ensure_future(limited(coro)) for coro in coros]
        try:
            return await asyncio.gather(*tasks)
        except BaseException:
            for task in tasks:
                task.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)
            raise

    # retrieval

    async def _get_piece(self, member: str, ref: ChunkRef, index: int) -> CodedPiece | None:
        try:
            request = GetPiece(chunk_id=ref.chunk_id, index=index)
            reply = await self.transport.call(member, request, PieceReply, self.settings.REQUEST_TIMEOUT)
        except (ScherbeError, LoggedCustomException) as err:
            log.debug("Piece unavailable", extra={"member": member, "chunk": ref.chunk_id.hex(), "index": index, "error": str(err)})
            return None
        return reply.piece

    def _reap(self, task: asyncio.Task[Any]) -> None:
        self._stragglers.discard(task)
        if not task.cancelled():
            task.exception()

    def _try_decode(self, ref: ChunkRef, pieces: dict[int, CodedPiece], params: CodingParams, tried: set[tuple[int, ...]]) -> bytes | None:
        """Decode from untried k-subsets of `pieces` until one reproduces the chunk id."""
        for subset in itertools.combinations(sorted(pieces), params.k):
            if subset in tried:
                continue
            if len(tried) >= self.settings.DECODE_ATTEMPTS:
                return None
            tried.add(subset)
            chosen = [pieces[index] for index in subset]
            try:
                return decode_chunk(chosen, params, chosen[0].original_len, max_subsets=1)
            except DigestMismatchError:
                log.warning("Decoded digest mismatch", extra={"chunk": ref.chunk_id.hex(), "subset": list(subset)})
            except ErasureCodingError as err:
                log.debug("Decode failed", extra={"chunk": ref.chunk_id.hex(), "subset": list(subset), "error": str(err)})
        return None

    async def fetch_chunk(self, ref: ChunkRef, cluster: ClusterState | None = None, params: CodingParams | None = None) -> bytes:
        """Request all n pieces at once and decode as soon as k valid ones arrived.

        Outstanding requests are cancelled once the chunk is decoded; they finish in the background.

        Raises:
            UnrecoverableChunkError: so many pieces failed that k can not be reached.
            CorruptChunkError: k or more pieces arrived, yet no tried subset matches the chunk id.

        """
        cluster = cluster or self._cluster(ref.cluster_id)
        params = params or self.params
        if cluster.n != params.n:
            raise ConfigError(f"cluster {cluster.cluster_id} has {cluster.n} members, n={params.n}")
        requests = {asyncio.ensure_future(self._get_piece(member, ref, index)): index for index, member in enumerate(cluster.members)}
        pending: set[asyncio.Future[CodedPiece | None]] = set(requests)
        pieces: dict[int, CodedPiece] = {}
        tried: set[tuple[int, ...]] = set()
        try:
            while pending:
                done, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
                for task in done:
                    piece = task.result()
                    index = requests[task]
                    if piece is None or piece.chunk_id != ref.chunk_id or piece.index != index or piece.params != params:
                        continue
                    pieces[index] = piece
                if len(pieces) + len(pending) < params.k:
                    raise UnrecoverableChunkError(ref.chunk_id, f"{len(pieces)} of {params.n} pieces available, {params.k} needed")
                if len(pieces) >= params.k:
                    payload = self._try_decode(ref, pieces, params, tried)
                    if payload is not None:
                        return payload
            raise CorruptChunkError(f"no subset of {len(pieces)} pieces decodes to chunk {ref.chunk_id.hex()}")
        finally:
            for task in sorted(pending, key=requests.__getitem__):
                task.cancel()
                self._stragglers.add(task)  # type: ignore[arg-type]
                task.add_done_callback(self._reap)  # type: ignore[arg-type]

    async def fetch_meta(self, file_name: str) -> FileMeta:
        """The device's copy of a FileMeta, else the switching node's.

        Raises:
            NotFoundError: neither side knows the file.

        """
        meta = self.cache.get_meta(self.user_id, file_name)
        if meta is not None:
            return meta
        reply = await self._call(self.switch, GetMeta(user=self.user_id, file_name=file_name), MetaReply)
        if reply.meta is None:
            raise NotFoundError(f"{self.user_id}/{file_name} does not exist")
        self.cache.put_meta(reply.meta)
        return reply.meta

    async def retrieve_file(self, file_name: str) -> tuple[bytes, RetrievalReport]:
        """Reassemble a file from cached chunks and first-k fetches of the others.

        Raises:
            NotFoundError: the file is unknown.
            UnrecoverableChunkError: a chunk can not be rebuilt.

        """
        loop = asyncio.get_running_loop()
        started = loop.time()
        received_before = self.transport.bytes_received
        meta = await self.fetch_meta(file_name)
        payloads: dict[bytes, bytes] = {}
        to_fetch: list[ChunkRef] = []
        for ref in meta.distinct_refs():
            cached = self.cache.get(ref.chunk_id)
            if cached is None:
                to_fetch.append(ref)
            else:
                payloads[ref.chunk_id] = cached

        async def fetch(ref: ChunkRef) -> None:
            payloads[ref.chunk_id] = await self.fetch_chunk(ref)
            self.cache.put(payloads[ref.chunk_id], ref.chunk_id)

        await self._bounded([fetch(ref) for ref in to_fetch], self.settings.FETCH_WINDOW)
        data = b"".join(payloads[ref.chunk_id] for ref in meta.chunks)
        if len(data) != meta.total_len:
            raise MetadataError(f"{file_name} reassembled to {len(data)} bytes, meta says {meta.total_len}")
        report = RetrievalReport(
            file_name=file_name,
            total_len=len(data),
            chunks_total=len(meta.chunks),
            chunks_cached=len(meta.distinct_refs()) - len(to_fetch),
            chunks_fetched=len(to_fetch),
            started_at=started,
            duration_ms=(loop.time() - started) * 1000,
            wire_bytes_received=self.transport.bytes_received - received_before,
        )
        log.info("Retrieved file", extra={"user": self.user_id, **report.model_dump()})
        return data, report

    # file management

    async def delete_file(self, file_name: str) -> None:
        """Raises NotFoundError when the switching node does not know the file."""
        self.cache.remove_meta(self.user_id, file_name)
        await self._call(self.switch, DeleteFile(user=self.user_id, file_name=file_name), DeleteAck)

    async def list_files(self) -> FileList:
        return await self._call(self.switch, ListFiles(user=self.user_id), FileList)

    async def sync_local_meta(self) -> SyncReport:
        """Converge the device's FileMetas and the switching node's on the last writer per file."""
        remote_names = {entry.file_name for entry in (await self.list_files()).files}
        local = {meta.file_name: meta for meta in self.cache.user_metas(self.user_id)}
        report = SyncReport()
        for name in sorted(remote_names | set(local)):
            remote = None
            if name in remote_names:
                remote = (await self._call(self.switch, GetMeta(user=self.user_id, file_name=name), MetaReply)).meta
            mine = local.get(name)
            winner = sync_meta(mine, remote)
            if winner == remote and winner == mine:
                report.in_sync.append(name)
            elif winner is mine:
                if await self._push(mine):  # type: ignore[arg-type]
                    report.pushed.append(name)
                else:
                    report.dropped.append(name)
            else:
                self.cache.put_meta(winner)
                report.pulled.append(name)
        log.info(
            "Synchronised metas",
            extra={"user": self.user_id, "pushed": len(report.pushed), "pulled": len(report.pulled), "dropped": len(report.dropped)},
        )
        return report

    async def _push(self, meta: FileMeta) -> bool:
        """Offer the local copy to the switching node; False when it was dropped as unrecoverable."""
        payloads = {ref.chunk_id: self.cache.get(ref.chunk_id) for ref in meta.distinct_refs()}
        complete = all(payload is not None for payload in payloads.values())
        lengths = [len(payloads[ref.chunk_id]) for ref in meta.chunks] if complete else []  # type: ignore[arg-type]
        try:
            reply = await self._call(self.switch, StoreMeta(user=self.user_id, meta=meta, chunk_lengths=lengths), MissingList)
        except RemoteError as err:
            if complete:
                raise
            self._drop_local(meta, str(err))
            return False
        if not reply.accepted:
            return True
        lost = [ref for ref in reply.missing if payloads.get(ref.chunk_id) is None]
        if lost:
            await self._call(self.switch, DeleteFile(user=self.user_id, file_name=meta.file_name), DeleteAck)
            self._drop_local(meta, f"{len(lost)} chunks exist on neither side")
            return False
        self.cache.put_meta(meta.with_placements(reply.placements))
        for ref in reply.missing:
            await self._store_chunk(ref, payloads[ref.chunk_id])  # type: ignore[arg-type]
        return True

    def _drop_local(self, meta: FileMeta, reason: str) -> None:
        self.cache.remove_meta(self.user_id, meta.file_name)
        log.warning("Dropping unrecoverable local copy", extra={"user": self.user_id, "file": meta.file_name, "reason": reason})

