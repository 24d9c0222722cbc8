# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Binary form of FileMeta, shared by the wire and the journal.

Layout, all integers big-endian: u16 name length, name, u16 user length, user,
u64 timestamp, u64 total_len, u32 entry count, then per entry 20-byte chunk id and u16 cluster id.
"""

from pydantic import ValidationError

from scherbe.chunking import CHUNK_ID_SIZE
from scherbe.core.buffers import ByteReader, ByteWriter
from scherbe.exceptions import MalformedFrameError

from .models import ChunkRef, FileMeta

REF_SIZE = CHUNK_ID_SIZE + 2


def write_chunk_ref(writer: ByteWriter, ref: ChunkRef) -> None:
    writer.raw(ref.chunk_id).u16(ref.cluster_id)


def read_chunk_ref(reader: ByteReader) -> ChunkRef:
    return ChunkRef(chunk_id=reader.raw(CHUNK_ID_SIZE), cluster_id=reader.u16())


def write_file_meta(writer: ByteWriter, meta: FileMeta) -> None:
    writer.text(meta.file_name).text(meta.user_id).u64(meta.timestamp).u64(meta.total_len).u32(len(meta.chunks))
    for ref in meta.chunks:
        write_chunk_ref(writer, ref)


def read_file_meta(reader: ByteReader) -> FileMeta:
    file_name = reader.text()
    user_id = reader.text()
    timestamp = reader.u64()
    total_len = reader.u64()
    count = reader.u32()
    if count * REF_SIZE > reader.remaining:
        raise MalformedFrameError(f"meta claims {count} entries, only {reader.remaining} bytes left")
    chunks = tuple(read_chunk_ref(reader) for _ in range(count))
    try:
        return FileMeta(file_name=file_name, user_id=user_id, timestamp=timestamp, chunks=chunks, total_len=total_len)
    except ValidationError as err:
        raise MalformedFrameError(f"invalid file meta: {err}") from err


def encode_file_meta(meta: FileMeta) -> bytes:
    writer = ByteWriter()
    write_file_meta(writer, meta)
    return writer.getvalue()


def decode_file_meta(data: bytes) -> FileMeta:
    reader = ByteReader(data)
    meta = read_file_meta(reader)
    reader.expect_end()
    return meta


def encoded_size(meta: FileMeta) -> int:
    return 2 + len(meta.file_name.encode()) + 2 + len(meta.user_id.encode()) + 8 + 8 + 4 + REF_SIZE * len(meta.chunks)
