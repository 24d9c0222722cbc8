# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Systematic (n, k) Reed-Solomon coding of chunks.

The generator is an n x k Vandermonde matrix multiplied by the inverse of its top k x k
block, so the first k rows are the identity and every k rows stay invertible.

```python
from scherbe.erasure import CodingParams, decode_chunk, encode_chunk

pieces = encode_chunk(b"hello world", CodingParams(n=4, k=2))
print(decode_chunk(pieces[2:], CodingParams(n=4, k=2), 11))
#> b'hello world'
```
"""

import itertools
import math
from collections.abc import Iterable
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from scherbe.chunking import ChunkId, chunk_id
from scherbe.exceptions import DigestMismatchError, ErasureCodingError, InconsistentPiecesError, InsufficientPiecesError

from .galois import mat_inv, mat_mul, vandermonde


class CodingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(10, ge=1, le=255)
    k: int = Field(5, ge=1, le=255)

    @model_validator(mode="after")
    def _k_below_n(self) -> "CodingParams":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        return self

    def piece_len(self, original_len: int) -> int:
        return math.ceil(original_len / self.k)

    def expansion(self, original_len: int) -> int:
        """Bytes a chunk of `original_len` occupies across the whole cluster."""
        return self.n * self.piece_len(original_len)


class CodedPiece(BaseModel):
    model_config = ConfigDict(frozen=True)

    chunk_id: ChunkId
    index: int = Field(ge=0, le=254)
    params: CodingParams
    original_len: int = Field(ge=1)
    payload: bytes

    @model_validator(mode="after")
    def _check_layout(self) -> "CodedPiece":
        if self.index >= self.params.n:
            raise ValueError(f"piece index {self.index} outside of n={self.params.n}")
        if len(self.payload) != self.params.piece_len(self.original_len):
            raise ValueError(f"piece payload of {len(self.payload)} bytes, expected {self.params.piece_len(self.original_len)}")
        return self


@lru_cache(maxsize=64)
def generator_matrix(n: int, k: int) -> np.ndarray:
    full = vandermonde(n, k)
    matrix = mat_mul(full, mat_inv(full[:k]))
    matrix.flags.writeable = False
    return matrix


@lru_cache(maxsize=1024)
def _decode_matrix(n: int, k: int, indices: tuple[int, ...]) -> np.ndarray:
    matrix = mat_inv(generator_matrix(n, k)[list(indices)])
    matrix.flags.writeable = False
    return matrix


def encode_chunk(payload: bytes, params: CodingParams, *, digest: bytes | None = None) -> list[CodedPiece]:
    """Encode a chunk into n pieces, pieces 0..k-1 are the zero-padded data slices.

    Raises:
        ErasureCodingError: empty payload.

    """
    if not payload:
        raise ErasureCodingError("can not encode an empty chunk")
    digest = digest or chunk_id(payload)
    piece_len = params.piece_len(len(payload))
    data = np.zeros(params.k * piece_len, dtype=np.uint8)
    data[: len(payload)] = np.frombuffer(payload, dtype=np.uint8)
    rows = data.reshape(params.k, piece_len)
    if params.n > params.k:
        parity = mat_mul(generator_matrix(params.n, params.k)[params.k :], rows)
        rows = np.concatenate([rows, parity])
    return [
        CodedPiece(chunk_id=digest, index=index, params=params, original_len=len(payload), payload=row.tobytes())
        for index, row in enumerate(rows)
    ]


def _check_consistent(pieces: list[CodedPiece], params: CodingParams, original_len: int) -> None:
    reference = pieces[0]
    for piece in pieces:
        if piece.chunk_id != reference.chunk_id:
            raise InconsistentPiecesError(f"pieces of {reference.chunk_id.hex()} and {piece.chunk_id.hex()} mixed")
        if piece.params != params:
            raise InconsistentPiecesError(f"piece {piece.index} coded with {piece.params}, expected {params}")
        if piece.original_len != original_len:
            raise InconsistentPiecesError(f"piece {piece.index} claims {piece.original_len} bytes, expected {original_len}")


def _decode_subset(chosen: list[CodedPiece], params: CodingParams, original_len: int) -> bytes:
    indices = tuple(piece.index for piece in chosen)
    if indices == tuple(range(params.k)):
        return b"".join(piece.payload for piece in chosen)[:original_len]
    rows = np.stack([np.frombuffer(piece.payload, dtype=np.uint8) for piece in chosen])
    data = mat_mul(_decode_matrix(params.n, params.k, indices), rows)
    return data.tobytes()[:original_len]


def decode_chunk(
    pieces: Iterable[CodedPiece], params: CodingParams, original_len: int, *, verify: bool = True, max_subsets: int = 64
) -> bytes:
    """Rebuild the chunk, trying k-subsets lowest indices first until one hashes to the chunk id.

    With `verify=False` the k lowest distinct indices are decoded and returned unchecked.

    Raises:
        InsufficientPiecesError: fewer than k distinct indices.
        InconsistentPiecesError: pieces disagree on chunk id, params or length.
        DigestMismatchError: none of the first `max_subsets` subsets reproduces the chunk id.

    """
    by_index: dict[int, CodedPiece] = {}
    for piece in pieces:
        by_index.setdefault(piece.index, piece)
    if len(by_index) < params.k:
        raise InsufficientPiecesError(f"{len(by_index)} distinct pieces given, {params.k} needed")
    _check_consistent(list(by_index.values()), params, original_len)

    expected = by_index[min(by_index)].chunk_id
    tried = 0
    subsets = itertools.islice(itertools.combinations(sorted(by_index), params.k), max_subsets if verify else 1)
    for tried, subset in enumerate(subsets, start=1):
        payload = _decode_subset([by_index[index] for index in subset], params, original_len)
        if not verify or chunk_id(payload) == expected:
            return payload
    raise DigestMismatchError(f"{tried} subsets of {len(by_index)} pieces tried, none decodes to {expected.hex()}")

