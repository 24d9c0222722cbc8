# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Append-only persistence of per-user ChunkMetaTables.

Records go through a RecordLog: PUT carries an encoded FileMeta, DELETE the user and file name.
Replaying the journal rebuilds the tables; a torn record at the tail (crash during append) is
cut off before anything new is appended.
"""

import logging
from collections.abc import Iterator
from enum import IntEnum
from pathlib import Path

from scherbe.core.buffers import ByteReader, ByteWriter
from scherbe.core.journal import RecordLog
from scherbe.exceptions import MalformedFrameError

from .codec import read_file_meta, write_file_meta
from .models import ChunkMetaTable, FileMeta

log = logging.getLogger(__name__)


class _Op(IntEnum):
    PUT = 1
    DELETE = 2


class MetaStore:
    """ChunkMetaTables of all users served by one switching node."""

    def __init__(self, path: Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self._tables: dict[str, ChunkMetaTable] = {}
        self._log = RecordLog(self.path) if self.path is not None else None
        if self._log is not None:
            self._replay(self._log)
            if self._log.records > 2 * max(1, self.file_count()):
                self.compact()

    def table(self, user_id: str) -> ChunkMetaTable:
        if user_id not in self._tables:
            self._tables[user_id] = ChunkMetaTable(user_id)
        return self._tables[user_id]

    def users(self) -> list[str]:
        return sorted(user for user, table in self._tables.items() if len(table))

    def metas(self) -> Iterator[FileMeta]:
        for user in self.users():
            yield from self._tables[user]

    def file_count(self) -> int:
        return sum(len(table) for table in self._tables.values())

    def put(self, meta: FileMeta) -> None:
        self.table(meta.user_id).put(meta)
        self._append(_Op.PUT, _encode(meta))


    def remove(self, user_id: str, file_name: str) -> FileMeta | None:
        removed = self.table(user_id).remove(file_name)
        if removed is not None:
            self._append(_Op.DELETE, ByteWriter().text(user_id).text(file_name).getvalue())
        return removed

    def _append(self, op: _Op, body: bytes) -> None:
        if self._log is not None:
            self._log.append(op, body)

    def _replay(self, journal: RecordLog) -> None:
        for index, (tag, data) in enumerate(journal.replay()):
            body = ByteReader(data)
            try:
                if tag == _Op.PUT:
                    meta = read_file_meta(body)
                    self.table(meta.user_id).put(meta)
                elif tag == _Op.DELETE:
                    user_id, file_name = body.text(), body.text()
                    self.table(user_id).remove(file_name)
                else:
                    raise MalformedFrameError(f"unknown journal opcode {tag}")
            except MalformedFrameError as err:
                log.error("Skipping unreadable journal record", extra={"journal": str(self.path), "record": index, "error": str(err)})

    def compact(self) -> None:
        """Rewrite the journal with one PUT per live file."""
        if self._log is None:
            return
        self._log.rewrite((_Op.PUT, _encode(meta)) for meta in self.metas())
        log.info("Compacted meta journal", extra={"journal": str(self.path), "files": self._log.records})


def _encode(meta: FileMeta) -> bytes:
    writer = ByteWriter()
    write_file_meta(writer, meta)
    return writer.getvalue()
