# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Append-only file of CRC checked records.

Record layout, big-endian: u32 crc32 over everything after it, u32 body length, u8 tag, body.
Replay stops at the first record that is short or fails its crc and truncates the file there,
so later appends never land behind a torn tail.
"""

import logging
import os
import zlib
from collections.abc import Iterable
from pathlib import Path

from .buffers import ByteReader, ByteWriter

log = logging.getLogger(__name__)

HEADER_SIZE = 9


def _crc(length: int, tag: int, body: bytes) -> int:
    return zlib.crc32(body, zlib.crc32(ByteWriter().u32(length).u8(tag).getvalue())) & 0xFFFFFFFF


def _frame(tag: int, body: bytes) -> bytes:
    return ByteWriter().u32(_crc(len(body), tag, body)).u32(len(body)).u8(tag).raw(body).getvalue()


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    except OSError:
        pass
    finally:
        os.close(fd)


class RecordLog:
    """One journal file; `records` counts the records currently in it."""

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.records = 0

    def replay(self) -> list[tuple[int, bytes]]:
        if not self.path.exists():
            return []
        data = self.path.read_bytes()
        reader = ByteReader(data)
        records: list[tuple[int, bytes]] = []
        while reader.remaining:
            start = reader.offset
            if reader.remaining < HEADER_SIZE:
                self._truncate(start, "short header")
                break
            crc, length, tag = reader.u32(), reader.u32(), reader.u8()
            if length > reader.remaining:
                self._truncate(start, f"body of {length} bytes, {reader.remaining} left")
                break
            body = reader.raw(length)
            if _crc(length, tag, body) != crc:
                self._truncate(start, "crc mismatch")
                break
            records.append((tag, body))
        self.records = len(records)
        return records

    def _truncate(self, offset: int, reason: str) -> None:
        log.warning("Dropping torn journal tail", extra={"journal": str(self.path), "offset": offset, "reason": reason})
        with self.path.open("r+b") as journal:
            journal.truncate(offset)
            journal.flush()
            os.fsync(journal.fileno())

    def append(self, tag: int, body: bytes) -> None:
        with self.path.open("ab") as journal:
            journal.write(_frame(tag, body))
            journal.flush()
            os.fsync(journal.fileno())
        self.records += 1

    def rewrite(self, records: Iterable[tuple[int, bytes]]) -> None:
        """Replace the journal with `records`, temp file then rename."""
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        count = 0
        with tmp.open("wb") as journal:
            for tag, body in records:
                journal.write(_frame(tag, body))
                count += 1
            journal.flush()
            os.fsync(journal.fileno())
        os.replace(tmp, self.path)
        _fsync_dir(self.path.parent)
        self.records = count


__all__ = ["HEADER_SIZE", "RecordLog"]
