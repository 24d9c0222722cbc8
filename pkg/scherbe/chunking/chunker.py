# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Content-defined chunking.

A boundary follows the byte at position `i` when the chunk started at `s` is at least
`min_size` long and the gear hash of the trailing window,

    h(i) = sum(GEAR[data[i - j]] << j for j in range(window_size)) mod 2**64,

has its low `boundary_mask_bits` bits cleared, or when the chunk reached `max_size`.
The low bits of `h` are identical to the classic `h = (h << 1) + GEAR[byte]` recurrence, so
boundaries only depend on local content and re-synchronise right after an edit.

Example:
```python
from scherbe.chunking import ChunkParams, chunk_stream

chunks = chunk_stream(b"", ChunkParams())
print(chunks)
#> []
```
"""

import hashlib
import logging
from pathlib import Path
from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from scherbe.exceptions import ChunkingError

log = logging.getLogger(__name__)

CHUNK_ID_SIZE = 20
ChunkId = Annotated[bytes, Field(min_length=CHUNK_ID_SIZE, max_length=CHUNK_ID_SIZE)]

_GEAR_SEED = b"scherbe-gear-v1"


def _gear_table() -> np.ndarray:
    table = np.array(
        [int.from_bytes(hashlib.sha256(_GEAR_SEED + bytes([value])).digest()[:8], "big") for value in range(256)],
        dtype=np.uint64,
    )
    table.flags.writeable = False
    return table


GEAR = _gear_table()


class ChunkParams(BaseModel):
    """Boundary parameters, expected chunk size is about min_size + 2**boundary_mask_bits."""

    model_config = ConfigDict(frozen=True)

    min_size: int = Field(1024, gt=0)
    max_size: int = Field(8192, gt=0)
    boundary_mask_bits: int = Field(12, ge=1, le=31)
    window_size: int = Field(48, ge=1, le=64)

    @model_validator(mode="after")
    def _min_below_max(self) -> "ChunkParams":
        if self.min_size > self.max_size:
            raise ValueError(f"min_size {self.min_size} exceeds max_size {self.max_size}")
        return self

    @property
    def mask(self) -> int:
        return (1 << self.boundary_mask_bits) - 1


class Chunk(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: ChunkId
    payload: bytes

    @property
    def length(self) -> int:
        return len(self.payload)


def chunk_id(payload: bytes) -> bytes:
    """SHA-1 digest of a payload, the identity of a chunk."""
    return hashlib.sha1(payload, usedforsecurity=False).digest()


def window_hashes(data: bytes, params: ChunkParams) -> np.ndarray:
    """Gear hash of the trailing window for every position of `data` (uint64, wraps)."""
    values = GEAR[np.frombuffer(data, dtype=np.uint8)]
    hashes = values.copy()
    for shift in range(1, min(params.window_size, len(values))):
        hashes[shift:] += values[: len(values) - shift] << np.uint64(shift)
    return hashes


def cut_points(data: bytes, params: ChunkParams) -> list[int]:
    """Exclusive end offsets of all chunks of `data`, the last one equals len(data)."""
    size = len(data)
    if size == 0:
        return []
    candidates = np.flatnonzero((window_hashes(data, params) & np.uint64(params.mask)) == 0)
    cuts: list[int] = []
    start = 0
    while start < size:
        earliest = start + params.min_size - 1
        latest = start + params.max_size - 1
        if earliest >= size - 1:
            break
        index = int(np.searchsorted(candidates, earliest))
        if index < len(candidates) and candidates[index] <= latest:
            end = int(candidates[index])
        elif latest < size - 1:
            end = latest
        else:
            break
        cuts.append(end + 1)
        start = end + 1
    if start < size:
        cuts.append(size)
    return cuts


def chunk_stream(data: bytes, params: ChunkParams | None = None) -> list[Chunk]:
    """Split `data` into content-defined chunks, concatenating the payloads gives back `data`."""
    params = params or ChunkParams()
    data = bytes(data)
    chunks = []
    start = 0
    for end in cut_points(data, params):
        payload = data[start:end]
        chunks.append(Chunk(id=chunk_id(payload), payload=payload))
        start = end
    log.debug("Chunked stream", extra={"bytes": len(data), "chunks": len(chunks)})
    return chunks


def chunk_file(path: Path, params: ChunkParams | None = None) -> list[Chunk]:
    try:
        data = Path(path).read_bytes()
    except OSError as err:
        raise ChunkingError(f"can not read {path}: {err}") from err
    return chunk_stream(data, params)
