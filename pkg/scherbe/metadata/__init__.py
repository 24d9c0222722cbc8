# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .codec import decode_file_meta, encode_file_meta, encoded_size, read_chunk_ref, read_file_meta, write_chunk_ref, write_file_meta
from .journal import MetaStore
from .models import UNPLACED, ChunkMetaTable, ChunkRef, ClusterId, FileMeta, RefCountTable
from .ops import apply_refcounts, build_file_meta, missing_chunks, sync_meta

__all__ = [
    "UNPLACED",
    "ChunkMetaTable",
    "ChunkRef",
    "ClusterId",
    "FileMeta",
    "MetaStore",
    "RefCountTable",
    "apply_refcounts",
    "build_file_meta",
    "decode_file_meta",
    "encode_file_meta",
    "encoded_size",
    "missing_chunks",
    "read_chunk_ref",
    "read_file_meta",
    "sync_meta",
    "write_chunk_ref",
    "write_file_meta",
]
