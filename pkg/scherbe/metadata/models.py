# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""File chunk-meta-data and the tables built from it."""

from collections import Counter
from collections.abc import Iterable, Iterator
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field

from scherbe.chunking import ChunkId
from scherbe.exceptions import RefCountCorruptionError

ClusterId = Annotated[int, Field(ge=0, le=0xFFFF)]
UNPLACED = 0xFFFF
"""cluster id of an entry the switching node has not bound yet."""


class ChunkRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    chunk_id: ChunkId
    cluster_id: ClusterId = UNPLACED

    @property
    def placed(self) -> bool:
        return self.cluster_id != UNPLACED

    def __repr__(self) -> str:
        return f"ChunkRef({self.chunk_id.hex()[:12]}@{self.cluster_id})"


class FileMeta(BaseModel):
    """The sole representation of a stored file: its chunks in file order."""

    model_config = ConfigDict(frozen=True)

    file_name: str = Field(min_length=1)
    user_id: str = Field(min_length=1)
    timestamp: int = Field(ge=0, description="milliseconds since epoch, supplied by the writer")
    chunks: tuple[ChunkRef, ...] = ()
    total_len: int = Field(0, ge=0)

    def distinct_refs(self) -> list[ChunkRef]:
        """Entries with repeated chunks collapsed, first occurrence order."""
        return list(dict.fromkeys(self.chunks))

    def with_placements(self, placements: Iterable[int], timestamp: int | None = None) -> "FileMeta":
        refs = tuple(ChunkRef(chunk_id=ref.chunk_id, cluster_id=cluster) for ref, cluster in zip(self.chunks, placements, strict=True))
        return self.model_copy(update={"chunks": refs, "timestamp": self.timestamp if timestamp is None else timestamp})


class ChunkMetaTable:
    """Per-user table, one FileMeta per file name."""

    def __init__(self, user_id: str, files: Iterable[FileMeta] = ()) -> None:
        self.user_id = user_id
        self._files: dict[str, FileMeta] = {}
        for meta in files:
            self.put(meta)

    def get(self, file_name: str) -> FileMeta | None:
        return self._files.get(file_name)

    def put(self, meta: FileMeta) -> None:
        if meta.user_id != self.user_id:
            raise ValueError(f"meta of user {meta.user_id} put into table of {self.user_id}")
        self._files[meta.file_name] = meta

    def remove(self, file_name: str) -> FileMeta | None:
        return self._files.pop(file_name, None)

    def names(self) -> list[str]:
        return sorted(self._files)

    def __iter__(self) -> Iterator[FileMeta]:
        return iter(list(self._files.values()))

    def __len__(self) -> int:
        return len(self._files)

    def __contains__(self, file_name: object) -> bool:
        return file_name in self._files


class RefCountTable:
    """Number of stored files referencing a chunk, keyed per (chunk_id, cluster_id); zero entries are absent."""

    def __init__(self) -> None:
        self._counts: Counter[ChunkRef] = Counter()

    def count(self, ref: ChunkRef) -> int:
        return self._counts.get(ref, 0)

    def adjust(self, ref: ChunkRef, delta: int) -> int:
        """Apply `delta` to one entry and return the new count.

        Raises:
            RefCountCorruptionError: the count would drop below zero.

        """
        count = self._counts.get(ref, 0) + delta
        if count < 0:
            raise RefCountCorruptionError(f"reference count of {ref!r} would drop to {count}")
        if count == 0:
            self._counts.pop(ref, None)
        else:
            self._counts[ref] = count
        return count

    def snapshot(self) -> dict[ChunkRef, int]:
        return dict(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, ref: object) -> bool:
        return ref in self._counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RefCountTable):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def recount(cls, metas: Iterable[FileMeta]) -> "RefCountTable":
        """Rebuild counts from scratch over stored metas."""
        table = cls()
        for meta in metas:
            for ref in meta.distinct_refs():
                table._counts[ref] += 1  # pylint: disable=protected-access
        return table
