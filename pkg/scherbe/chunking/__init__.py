# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .chunker import CHUNK_ID_SIZE, GEAR, Chunk, ChunkId, ChunkParams, chunk_file, chunk_id, chunk_stream, cut_points, window_hashes

__all__ = [
    "CHUNK_ID_SIZE",
    "GEAR",
    "Chunk",
    "ChunkId",
    "ChunkParams",
    "chunk_file",
    "chunk_id",
    "chunk_stream",
    "cut_points",
    "window_hashes",
]
