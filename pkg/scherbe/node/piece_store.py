# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Code pieces held by one node.

On disk every piece is a file `<hex chunk id>.<index>` starting with a 10-byte header
(u64 original length, u8 n, u8 k) followed by the payload. Files are written to a temporary
name and renamed, so a crash leaves either the old state or the complete piece.
"""

import logging
import os
import struct
from collections.abc import Iterator
from pathlib import Path

from pydantic import BaseModel, ValidationError

from scherbe.chunking import CHUNK_ID_SIZE
from scherbe.erasure import CodedPiece, CodingParams
from scherbe.exceptions import CapacityExhaustedError

log = logging.getLogger(__name__)

PIECE_HEADER = struct.Struct(">QBB")
PIECE_HEADER_SIZE = PIECE_HEADER.size

PieceId = tuple[bytes, int]


class _PieceInfo(BaseModel):
    params: CodingParams
    original_len: int
    size: int


class PieceStore:
    """At most one piece per (chunk id, index); `directory=None` keeps pieces in memory."""

    def __init__(self, directory: Path | None = None, capacity: int = 1 << 30) -> None:
        self.directory = Path(directory) if directory is not None else None
        self.capacity = capacity
        self._index: dict[PieceId, _PieceInfo] = {}
        self._payloads: dict[PieceId, bytes] = {}
        self.used_bytes = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self.scan()

    def _path(self, key: PieceId) -> Path:
        return self.directory / f"{key[0].hex()}.{key[1]}"  # type: ignore[operator]

    def put(self, piece: CodedPiece) -> bool:
        """Store `piece`, False when that (chunk id, index) is already held.

        Raises:
            CapacityExhaustedError: the payload does not fit into the remaining capacity.

        """
        key = (piece.chunk_id, piece.index)
        if key in self._index:
            return False
        if self.used_bytes + len(piece.payload) > self.capacity:
            remaining = self.capacity - self.used_bytes
            raise CapacityExhaustedError(f"piece of {len(piece.payload)} bytes exceeds the remaining {remaining} bytes")
        if self.directory is None:
            self._payloads[key] = piece.payload
        else:
            path = self._path(key)
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_bytes(PIECE_HEADER.pack(piece.original_len, piece.params.n, piece.params.k) + piece.payload)
            os.replace(tmp, path)
        self._index[key] = _PieceInfo(params=piece.params, original_len=piece.original_len, size=len(piece.payload))
        self.used_bytes += len(piece.payload)
        return True

    def get(self, chunk_id: bytes, index: int) -> CodedPiece | None:
        key = (chunk_id, index)
        info = self._index.get(key)
        if info is None:
            return None
        if self.directory is None:
            payload = self._payloads[key]
        else:
            try:
                payload = self._path(key).read_bytes()[PIECE_HEADER_SIZE:]
            except FileNotFoundError:
                log.warning("Piece file vanished", extra={"chunk": chunk_id.hex(), "index": index})
                self._forget(key)
                return None
        return CodedPiece(chunk_id=chunk_id, index=index, params=info.params, original_len=info.original_len, payload=payload)

    def delete(self, chunk_id: bytes, index: int) -> bool:
        key = (chunk_id, index)
        if key not in self._index:
            return False
        if self.directory is not None:
            self._path(key).unlink(missing_ok=True)
        self._forget(key)
        return True

    def _forget(self, key: PieceId) -> None:
        info = self._index.pop(key)
        self._payloads.pop(key, None)
        self.used_bytes -= info.size

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self._index)

    def keys(self) -> Iterator[PieceId]:
        yield from sorted(self._index)

    @property
    def header_bytes(self) -> int:
        return PIECE_HEADER_SIZE * len(self._index)

    def scan(self) -> None:
        """Rebuild the index from the directory, dropping leftovers of interrupted writes."""
        if self.directory is None:
            return
        self._index.clear()
        self.used_bytes = 0
        for path in sorted(self.directory.iterdir()):
            if path.suffix == ".tmp":
                path.unlink(missing_ok=True)
                continue
            name, _, index = path.name.partition(".")
            try:
                chunk_id = bytes.fromhex(name)
                if len(chunk_id) != CHUNK_ID_SIZE or not index.isdigit():
                    raise ValueError(path.name)
                with path.open("rb") as piece_file:
                    original_len, n, k = PIECE_HEADER.unpack(piece_file.read(PIECE_HEADER_SIZE))
                info = _PieceInfo(params=CodingParams(n=n, k=k), original_len=original_len, size=path.stat().st_size - PIECE_HEADER_SIZE)
            except (ValueError, struct.error, ValidationError) as err:
                log.warning("Ignoring unexpected file in piece store", extra={"path": str(path), "error": str(err)})
                continue
            self._index[(chunk_id, int(index))] = info
            self.used_bytes += info.size
        log.info("Scanned piece store", extra={"directory": str(self.directory), "pieces": len(self._index), "used_bytes": self.used_bytes})
