# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Request handling of a storage node.

A node always stores code pieces. Depending on the request it also acts as switching node
(metadata authority of its users), coding node (encode and fan out a chunk to its cluster)
and, on the directory address of the topology, as placement directory.
"""

import asyncio
import logging
from collections import defaultdict
from collections.abc import Awaitable, Callable, Sequence

from pydantic import ValidationError

from scherbe.binding import PlacementDirectory
from scherbe.chunking import chunk_id
from scherbe.core.logging import request_scope
from scherbe.erasure import CodedPiece, encode_chunk
from scherbe.exceptions import (
    CapacityExhaustedError,
    IntegrityError,
    MetadataError,
    NotFoundError,
    NotResponsibleError,
    PartialStoreError,
    RemoteError,
    ScherbeError,
    TransportError,
    WireError,
)
from scherbe.metadata import ChunkRef, FileMeta, MetaStore, encoded_size, sync_meta
from scherbe.topology import Topology
from scherbe.wire import (
    Bind,
    BindReply,
    Cancel,
    ChunkStored,
    DeleteAck,
    DeleteFile,
    DeletePiece,
    ErrorCode,
    ErrorReply,
    FileEntry,
    FileList,
    GetMeta,
    GetPiece,
    ListFiles,
    Message,
    MetaReply,
    MissingList,
    PieceAck,
    PieceKey,
    PieceReply,
    RefCount,
    Release,
    ReleaseReply,
    Scan,
    ScanReply,
    StoreAck,
    StoreChunk,
    StoreMeta,
    StorePiece,
    Transport,
)

from .metrics import NodeMetrics
from .piece_store import PieceStore
from .settings import NodeSettings

log = logging.getLogger(__name__)

_ERROR_CODES: list[tuple[type[BaseException], ErrorCode]] = [
    (NotFoundError, ErrorCode.NOT_FOUND),
    (IntegrityError, ErrorCode.INTEGRITY),
    (CapacityExhaustedError, ErrorCode.CAPACITY),
    (PartialStoreError, ErrorCode.PARTIAL_STORE),
    (NotResponsibleError, ErrorCode.NOT_RESPONSIBLE),
    (MetadataError, ErrorCode.PROTOCOL),
    (WireError, ErrorCode.PROTOCOL),
    (ValidationError, ErrorCode.PROTOCOL),
]


def error_reply(err: BaseException) -> ErrorReply:
    """Wire form of a handler failure."""
    if isinstance(err, RemoteError):
        code = err.code if isinstance(err.code, ErrorCode) else ErrorCode.INTERNAL
        return ErrorReply(code=code, detail=err.detail)
    for exc_type, code in _ERROR_CODES:
        if isinstance(err, exc_type):
            return ErrorReply(code=code, detail=str(err))
    return ErrorReply(code=ErrorCode.INTERNAL, detail=f"{type(err).__name__}: {err}")


class StorageNode:  # pylint: disable=too-many-instance-attributes
    """All roles of one node, served through `handle`."""

    def __init__(self, settings: NodeSettings, topology: Topology, transport: Transport) -> None:
        self.settings = settings
        self.topology = topology
        self.transport = transport
        self.address = settings.LISTEN
        self.cluster_id, self.position = settings.check_against(topology)
        self.params = topology.params
        store_dir = settings.STORE_DIR
        self.pieces = PieceStore(store_dir / "pieces" if store_dir else None, settings.CAPACITY)
        self.metas = MetaStore(store_dir / "meta.journal" if store_dir else None)
        self.directory: PlacementDirectory | None = None
        if self.address == topology.directory_address:
            self.directory = PlacementDirectory(
                topology.cluster_states(),
                self.params,
                topology.binding_policy(),
                journal_path=store_dir / "directory.journal" if store_dir else None,
            )
        self.metrics = NodeMetrics(self.address)
        self.metrics.observe_store(len(self.pieces), self.pieces.used_bytes)
        self._user_locks: defaultdict[str, asyncio.Lock] = defaultdict(asyncio.Lock)
        self._collecting: dict[bytes, asyncio.Event] = {}
        self._handlers: dict[type[Message], Callable[[Message], Awaitable[Message | None]]] = {
            StoreMeta: self.handle_store_meta,
            GetMeta: self.handle_get_meta,
            ListFiles: self.handle_list_files,
            DeleteFile: self.handle_delete_file,
            StoreChunk: self.handle_store_chunk,
            StorePiece: self.handle_store_piece,
            GetPiece: self.handle_get_piece,
            DeletePiece: self.handle_delete_piece,
            Bind: self.handle_bind,
            Release: self.handle_release,
            ChunkStored: self.handle_chunk_stored,
            Scan: self.handle_scan,
            Cancel: self.handle_cancel,
        }  # type: ignore[dict-item]

    async def handle(self, src: str, message: Message) -> Message | None:
        """Serve one request; every failure becomes an ErrorReply."""
        with request_scope(message.request_id):
            msg_type = type(message).__name__
            self.metrics.requests.labels(msg_type=msg_type).inc()
            handler = self._handlers.get(type(message))
            try:
                if handler is None:
                    raise NotResponsibleError(f"{self.address} does not serve {msg_type}")
                return await handler(message)
            except asyncio.CancelledError:
                raise
            except Exception as err:  # pylint: disable=broad-exception-caught
                reply = error_reply(err)
                if reply.code is ErrorCode.INTERNAL:
                    log.exception("Request failed", extra={"node": self.address, "src": src, "msg_type": msg_type})
                else:
                    log.info("Request rejected", extra={"node": self.address, "src": src, "msg_type": msg_type, "error": str(err)})
                self.metrics.request_errors.labels(code=reply.code.name).inc()
                return reply

    # switching node

    def _check_switch(self, user: str) -> None:
        spec = self.topology.users.get(user)
        if spec is not None and spec.switch != self.address:
            raise NotResponsibleError(f"{self.address} is not the switching node of {user}, {spec.switch} is")

    async def handle_store_meta(self, message: StoreMeta) -> MissingList:
        """Merge an uploaded FileMeta, bind its chunks and list those still to be uploaded.

        An incoming copy only replaces the stored one when it is strictly newer.
        """
        meta = message.meta
        if meta.user_id != message.user:
            raise MetadataError(f"meta of {meta.user_id} sent by {message.user}")
        self._check_switch(message.user)
        async with self._user_locks[message.user]:
            stored = self.metas.table(message.user).get(meta.file_name)
            if stored is not None and sync_meta(meta, stored) is stored:
                log.info("Kept newer stored meta", extra={"user": message.user, "file": meta.file_name, "stored_ts": stored.timestamp})
                return MissingList(accepted=False, placements=[ref.cluster_id for ref in stored.chunks])
            bound, missing = await self._bind(message.user, meta, message.chunk_lengths, stored)
            self.metas.put(bound)
        log.info("Stored meta", extra={"user": message.user, "file": meta.file_name, "chunks": len(meta.chunks), "missing": len(missing)})
        return MissingList(accepted=True, missing=missing, placements=[ref.cluster_id for ref in bound.chunks])

    async def handle_get_meta(self, message: GetMeta) -> MetaReply:
        return MetaReply(meta=self.metas.table(message.user).get(message.file_name))

    async def handle_list_files(self, message: ListFiles) -> FileList:
        table = self.metas.table(message.user)
        entries = [FileEntry(file_name=name, timestamp=table.get(name).timestamp) for name in table.names()]  # type: ignore[union-attr]
        return FileList(files=entries)

    async def handle_delete_file(self, message: DeleteFile) -> DeleteAck:
        self._check_switch(message.user)
        async with self._user_locks[message.user]:
            removed = self.metas.remove(message.user, message.file_name)
            if removed is None:
                raise NotFoundError(f"{message.user}/{message.file_name} does not exist")
            await self._release(removed)
        log.info("Deleted file", extra={"user": message.user, "file": message.file_name})
        return DeleteAck(existed=True)

    async def _bind(self, user: str, meta: FileMeta, lengths: list[int], previous: FileMeta | None) -> tuple[FileMeta, list[ChunkRef]]:
        if self.directory is not None:
            return await self._directory_bind(user, meta, lengths, previous)
        reply = await self.transport.call(
            self.topology.directory_address,
            Bind(user=user, meta=meta, chunk_lengths=lengths, previous=previous),
            BindReply,
            self.settings.REQUEST_TIMEOUT,
        )
        return reply.meta, reply.missing

    async def _release(self, meta: FileMeta) -> int:
        if self.directory is not None:
            return await self._directory_release(meta)
        reply = await self.transport.call(self.topology.directory_address, Release(meta=meta), ReleaseReply, self.settings.REQUEST_TIMEOUT)
        return reply.released

    # placement directory

    def _require_directory(self) -> PlacementDirectory:
        if self.directory is None:
            raise NotResponsibleError(f"{self.address} is not the placement directory")
        return self.directory

    async def _settle(self, chunk_ids: Sequence[bytes]) -> None:
        """Wait until no piece of `chunk_ids` is being deleted."""
        while pending := [self._collecting[cid] for cid in chunk_ids if cid in self._collecting]:
            await pending[0].wait()

    async def _directory_bind(
        self, user: str, meta: FileMeta, lengths: list[int], previous: FileMeta | None
    ) -> tuple[FileMeta, list[ChunkRef]]:
        directory = self._require_directory()
        await self._settle([ref.chunk_id for ref in meta.chunks])
        result = directory.bind(user, meta, lengths, previous)
        await self._collect(result.released)
        return result.meta, result.missing

    async def _directory_release(self, meta: FileMeta) -> int:
        released = self._require_directory().release(meta)
        await self._collect(released)
        return len(released)

    async def _collect(self, released: Sequence[ChunkRef]) -> None:
        """Delete all pieces of chunks nobody references anymore."""
        if not released:
            return
        done = asyncio.Event()
        for ref in released:
            self._collecting[ref.chunk_id] = done
        try:
            deletions = []
            for ref in released:
                members = self.topology.cluster(ref.cluster_id).members
                deletions.extend(self._delete_piece(member, ref.chunk_id, index) for index, member in enumerate(members))
            await asyncio.gather(*deletions)
            log.info("Collected chunks", extra={"chunks": len(released)})
        finally:
            for ref in released:
                if self._collecting.get(ref.chunk_id) is done:
                    del self._collecting[ref.chunk_id]
            done.set()

    async def handle_bind(self, message: Bind) -> BindReply:
        meta, missing = await self._directory_bind(message.user, message.meta, message.chunk_lengths, message.previous)
        return BindReply(meta=meta, missing=missing)

    async def handle_release(self, message: Release) -> ReleaseReply:
        return ReleaseReply(released=await self._directory_release(message.meta))

    async def handle_chunk_stored(self, message: ChunkStored) -> StoreAck:
        return StoreAck(chunk_id=message.ref.chunk_id, kept=self._require_directory().confirm(message.ref))

    # coding node

    async def handle_store_chunk(self, message: StoreChunk) -> StoreAck:
        """Encode a chunk and place piece i on cluster member i; all n placed or none.

        Raises:
            IntegrityError: payload digest differs from the chunk id.
            PartialStoreError: a member failed after all retries, placed pieces were removed again.

        """
        if message.cluster_id != self.cluster_id:
            raise NotResponsibleError(f"{self.address} codes for cluster {self.cluster_id}, not {message.cluster_id}")
        if chunk_id(message.payload) != message.chunk_id:
            raise IntegrityError(f"payload of {len(message.payload)} bytes does not match chunk {message.chunk_id.hex()}")
        members = self.topology.cluster(self.cluster_id).members
        pieces = encode_chunk(message.payload, self.params, digest=message.chunk_id)
        results = await asyncio.gather(
            *(self._place_piece(member, piece) for member, piece in zip(members, pieces)),
            return_exceptions=True,
        )
        failures = [result for result in results if isinstance(result, BaseException)]
        created = [piece for piece, result in zip(pieces, results) if result is True]
        if failures:
            await self._drop_pieces(members, created)
            raise PartialStoreError(f"chunk {message.chunk_id.hex()}: {len(failures)} of {len(pieces)} pieces failed, first: {failures[0]}")

        ref = ChunkRef(chunk_id=message.chunk_id, cluster_id=self.cluster_id)
        kept = await self._confirm(ref)
        if not kept:
            await self._drop_pieces(members, created)
        log.debug(
            "Stored chunk",
            extra={"chunk": message.chunk_id.hex(), "length": len(message.payload), "created": len(created), "kept": kept},
        )
        return StoreAck(chunk_id=message.chunk_id, kept=kept)

    async def _confirm(self, ref: ChunkRef) -> bool:
        if self.directory is not None:
            return self.directory.confirm(ref)
        reply = await self.transport.call(self.topology.directory_address, ChunkStored(ref=ref), StoreAck, self.settings.REQUEST_TIMEOUT)
        return reply.kept

    async def _place_piece(self, member: str, piece: CodedPiece) -> bool:
        """True when the member created the piece, False when it already held it."""
        if member == self.address:
            return self._store_local(piece)
        failure = TransportError(f"no attempt to reach {member}")
        for attempt in range(self.settings.RETRIES + 1):
            try:
                ack = await self.transport.call(member, StorePiece(piece=piece), PieceAck, self.settings.REQUEST_TIMEOUT)
                return ack.created
            except TransportError as err:
                log.warning("Piece fan-out failed", extra={"member": member, "index": piece.index, "attempt": attempt, "error": str(err)})
                failure = err
        raise failure

    async def _drop_pieces(self, members: Sequence[str], pieces: Sequence[CodedPiece]) -> None:
        await asyncio.gather(*(self._delete_piece(members[piece.index], piece.chunk_id, piece.index) for piece in pieces))

    async def _delete_piece(self, member: str, chunk: bytes, index: int) -> bool:
        if member == self.address:
            return self._delete_local(chunk, index)
        for attempt in range(self.settings.RETRIES + 1):
            try:
                ack = await self.transport.call(member, DeletePiece(chunk_id=chunk, index=index), DeleteAck, self.settings.REQUEST_TIMEOUT)
                return ack.existed
            except (TransportError, ScherbeError) as err:
                log.warning(
                    "Piece deletion failed",
                    extra={"member": member, "chunk": chunk.hex(), "index": index, "attempt": attempt, "error": str(err)},
                )
        return False

    # piece storage

    def _store_local(self, piece: CodedPiece) -> bool:
        if piece.index != self.position:
            raise NotResponsibleError(f"{self.address} holds piece index {self.position}, got {piece.index}")
        if piece.params != self.params:
            raise NotResponsibleError(f"piece coded with {piece.params}, cluster uses {self.params}")
        created = self.pieces.put(piece)
        self.metrics.observe_store(len(self.pieces), self.pieces.used_bytes)
        return created

    def _delete_local(self, chunk: bytes, index: int) -> bool:
        existed = self.pieces.delete(chunk, index)
        self.metrics.observe_store(len(self.pieces), self.pieces.used_bytes)
        return existed

    async def handle_store_piece(self, message: StorePiece) -> PieceAck:
        created = self._store_local(message.piece)
        return PieceAck(chunk_id=message.piece.chunk_id, index=message.piece.index, created=created)

    async def handle_get_piece(self, message: GetPiece) -> PieceReply:
        return PieceReply(piece=self.pieces.get(message.chunk_id, message.index))

    async def handle_delete_piece(self, message: DeletePiece) -> DeleteAck:
        return DeleteAck(existed=self._delete_local(message.chunk_id, message.index))

    async def handle_cancel(self, message: Cancel) -> None:
        log.debug("Cancel for an already answered request", extra={"target": message.target})

    async def handle_scan(self, message: Scan) -> ScanReply:
        metas = list(self.metas.metas())
        reply = ScanReply(
            piece_count=len(self.pieces),
            piece_bytes=self.pieces.used_bytes,
            header_bytes=self.pieces.header_bytes,
            meta_bytes=sum(encoded_size(meta) for meta in metas),
            index_bytes=self.directory.index_bytes() if self.directory else 0,
            original_bytes=sum(meta.total_len for meta in metas),
            file_count=len(metas),
            charged_bytes=self.directory.used_bytes() if self.directory else 0,
        )
        if not message.detail:
            return reply
        refcounts = self.directory.refcounts.snapshot().items() if self.directory else []
        return reply.model_copy(
            update={
                "pieces": [PieceKey(chunk_id=cid, index=index) for cid, index in self.pieces.keys()],
                "refcounts": [RefCount(ref=ref, count=count) for ref, count in refcounts],
                "stored": list(self.directory.stored_refs()) if self.directory else [],
            }
        )
