# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from collections.abc import Collection, Sequence
from typing import Literal

from scherbe.chunking import Chunk
from scherbe.exceptions import MetadataError, RefCountCorruptionError

from .models import ChunkRef, FileMeta, RefCountTable


def build_file_meta(user_id: str, file_name: str, chunks: Sequence[Chunk], placements: Sequence[int], timestamp: int) -> FileMeta:
    """Describe a file by its chunks in file order; repeated payloads become repeated refs.

    Raises:
        MetadataError: placements and chunks differ in length.

    """
    if len(chunks) != len(placements):
        raise MetadataError(f"{len(chunks)} chunks but {len(placements)} placements for {file_name}")
    return FileMeta(
        file_name=file_name,
        user_id=user_id,
        timestamp=timestamp,
        chunks=tuple(ChunkRef(chunk_id=chunk.id, cluster_id=cluster) for chunk, cluster in zip(chunks, placements)),
        total_len=sum(chunk.length for chunk in chunks),
    )


def missing_chunks(meta: FileMeta, known: Collection[bytes]) -> list[ChunkRef]:
    """Refs of `meta` whose chunk id is not known, deduplicated by id in first-occurrence order."""
    missing: dict[bytes, ChunkRef] = {}
    for ref in meta.chunks:
        if ref.chunk_id not in known and ref.chunk_id not in missing:
            missing[ref.chunk_id] = ref
    return list(missing.values())


def sync_meta(local: FileMeta | None, remote: FileMeta | None) -> FileMeta:
    """Last writer wins; on equal timestamps the switching-node (remote) copy wins.

    Raises:
        MetadataError: both sides absent, or the copies describe different files.

    """
    if local is None and remote is None:
        raise MetadataError("nothing to synchronise, both copies are absent")
    if local is None:
        return remote  # type: ignore[return-value]
    if remote is None:
        return local
    if (local.user_id, local.file_name) != (remote.user_id, remote.file_name):
        raise MetadataError(f"can not sync {local.user_id}/{local.file_name} against {remote.user_id}/{remote.file_name}")
    return local if local.timestamp > remote.timestamp else remote


def apply_refcounts(table: RefCountTable, meta: FileMeta, delta: Literal[1, -1]) -> set[ChunkRef]:
    """Adjust every distinct ref of `meta` once and return the refs that dropped to zero.

    The table is left untouched when a decrement would underflow.

    Raises:
        RefCountCorruptionError: a ref of `meta` is not counted.

    """
    refs = meta.distinct_refs()
    if delta < 0:
        unknown = [ref for ref in refs if table.count(ref) < 1]
        if unknown:
            raise RefCountCorruptionError(f"{meta.user_id}/{meta.file_name} references uncounted chunks {unknown}")
    released = set()
    for ref in refs:
        if table.adjust(ref, delta) == 0:
            released.add(ref)
    return released
