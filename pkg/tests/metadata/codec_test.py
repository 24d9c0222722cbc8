# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import struct

import pytest

from scherbe.exceptions import MalformedFrameError
from scherbe.metadata import ChunkRef, FileMeta, decode_file_meta, encode_file_meta, encoded_size
from scherbe.metadata.codec import REF_SIZE


def _meta(entries: int = 3) -> FileMeta:
    return FileMeta(
        file_name="report.pdf",
        user_id="alice",
        timestamp=1_700_000_000_123,
        chunks=tuple(ChunkRef(chunk_id=bytes([i]) * 20, cluster_id=i) for i in range(entries)),
        total_len=12345,
    )


def test_layout():
    meta = _meta(1)
    data = encode_file_meta(meta)
    assert len(data) == encoded_size(meta)
    assert data[:12] == b"\x00\nreport.pdf"
    assert data[12:19] == b"\x00\x05alice"
    assert struct.unpack(">QQI", data[19:39]) == (1_700_000_000_123, 12345, 1)
    assert data[39:] == b"\x00" * 20 + b"\x00\x00"
    assert REF_SIZE == 22


@pytest.mark.parametrize("entries", [0, 1, 50])
def test_roundtrip(entries):
    meta = _meta(entries)
    assert decode_file_meta(encode_file_meta(meta)) == meta


def test_unicode_names():
    meta = FileMeta(file_name="bericht-ü.txt", user_id="jürgen", timestamp=0)
    assert decode_file_meta(encode_file_meta(meta)) == meta
    assert encoded_size(meta) == len(encode_file_meta(meta))


@pytest.mark.parametrize(
    "mangle",
    [
        pytest.param(lambda data: data[:-1], id="truncated"),
        pytest.param(lambda data: data + b"\x00", id="trailing"),
        pytest.param(lambda data: data[:35] + b"\xff\xff\xff\xff" + data[39:], id="huge-count"),
        pytest.param(lambda data: b"\x00\x00" + data[12:], id="empty-name"),
    ],
)
def test_malformed(mangle):
    with pytest.raises(MalformedFrameError):
        decode_file_meta(mangle(encode_file_meta(_meta(2))))
