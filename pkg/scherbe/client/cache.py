# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Chunks and FileMetas kept on the end device."""

import logging
from collections import OrderedDict
from pathlib import Path

from scherbe.chunking import chunk_id
from scherbe.exceptions import IntegrityError
from scherbe.metadata import FileMeta, MetaStore

log = logging.getLogger(__name__)


class LocalCache:
    """LRU chunk store bounded by payload bytes, plus the device's copy of its FileMetas.

    With a directory, chunks live in `chunks/<hex id>` and metas in a journal, so they
    survive restarts.
    """

    def __init__(self, budget: int = 256 * 1024 * 1024, directory: Path | None = None) -> None:
        self.budget = budget
        self.directory = Path(directory) if directory is not None else None
        self._chunks: OrderedDict[bytes, bytes] = OrderedDict()
        self.used_bytes = 0
        self.metas = MetaStore(self.directory / "meta.journal" if self.directory else None)
        if self.directory is not None:
            (self.directory / "chunks").mkdir(parents=True, exist_ok=True)
            self._load()

    def _chunk_path(self, digest: bytes) -> Path:
        return self.directory / "chunks" / digest.hex()  # type: ignore[operator]

    def _load(self) -> None:
        paths = sorted((self.directory / "chunks").iterdir(), key=lambda path: path.stat().st_mtime)  # type: ignore[operator]
        for path in paths:
            payload = path.read_bytes()
            try:
                self.put(payload, bytes.fromhex(path.name), persist=False)
            except (ValueError, IntegrityError):
                log.warning("Dropping corrupt cached chunk", extra={"path": str(path)})
                path.unlink(missing_ok=True)

    def get(self, digest: bytes) -> bytes | None:
        payload = self._chunks.get(digest)
        if payload is not None:
            self._chunks.move_to_end(digest)
        return payload

    def put(self, payload: bytes, digest: bytes | None = None, *, persist: bool = True) -> bytes:
        """Insert a chunk, evicting least recently used ones beyond the budget.

        Raises:
            IntegrityError: `payload` does not hash to `digest`.

        """
        actual = chunk_id(payload)
        if digest is not None and actual != digest:
            raise IntegrityError(f"cached payload hashes to {actual.hex()}, expected {digest.hex()}")
        if actual in self._chunks:
            self._chunks.move_to_end(actual)
            return actual
        if len(payload) > self.budget:
            return actual
        self._chunks[actual] = payload
        self.used_bytes += len(payload)
        if persist and self.directory is not None:
            self._chunk_path(actual).write_bytes(payload)
        while self.used_bytes > self.budget:
            evicted, old = self._chunks.popitem(last=False)
            self.used_bytes -= len(old)
            if self.directory is not None:
                self._chunk_path(evicted).unlink(missing_ok=True)
        return actual

    def __contains__(self, digest: object) -> bool:
        return digest in self._chunks

    def __len__(self) -> int:
        return len(self._chunks)

    def get_meta(self, user_id: str, file_name: str) -> FileMeta | None:
        return self.metas.table(user_id).get(file_name)

    def put_meta(self, meta: FileMeta) -> None:
        if self.get_meta(meta.user_id, meta.file_name) != meta:
            self.metas.put(meta)

    def remove_meta(self, user_id: str, file_name: str) -> FileMeta | None:
        return self.metas.remove(user_id, file_name)

    def user_metas(self, user_id: str) -> list[FileMeta]:
        return list(self.metas.table(user_id))
