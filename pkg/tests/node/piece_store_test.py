# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import pytest

from scherbe.erasure import CodingParams, encode_chunk
from scherbe.exceptions import CapacityExhaustedError
from scherbe.node import PIECE_HEADER_SIZE, PieceStore

PIECES = encode_chunk(b"0123456789" * 100, CodingParams(n=4, k=2))


@pytest.fixture(params=["memory", "disk"])
def store(request, tmp_path):
    return PieceStore(tmp_path / "pieces" if request.param == "disk" else None, capacity=2000)


def test_put_get_delete(store):
    assert store.put(PIECES[1])
    assert not store.put(PIECES[1])
    assert store.get(PIECES[1].chunk_id, 1) == PIECES[1]
    assert store.get(PIECES[1].chunk_id, 2) is None
    assert (PIECES[1].chunk_id, 1) in store
    assert store.used_bytes == 500
    assert store.header_bytes == PIECE_HEADER_SIZE == 10

    assert store.delete(PIECES[1].chunk_id, 1)
    assert not store.delete(PIECES[1].chunk_id, 1)
    assert len(store) == 0
    assert store.used_bytes == 0


def test_capacity(store):
    for piece in PIECES[:4]:
        store.put(piece)
    assert store.used_bytes == 2000
    other = encode_chunk(b"x", CodingParams(n=4, k=2))[0]
    with pytest.raises(CapacityExhaustedError):
        store.put(other)


def test_keys_are_sorted(store):
    for piece in reversed(PIECES[:3]):
        store.put(piece)
    assert list(store.keys()) == [(PIECES[0].chunk_id, index) for index in range(3)]


def test_restart_rescans_directory(tmp_path):
    directory = tmp_path / "pieces"
    store = PieceStore(directory)
    store.put(PIECES[0])
    store.put(PIECES[3])
    (directory / "leftover.0.tmp").write_bytes(b"partial")
    (directory / "README").write_text("not a piece", encoding="utf-8")
    (directory / f"{PIECES[0].chunk_id.hex()}.x").write_bytes(b"\x00" * 10)

    reopened = PieceStore(directory)
    assert list(reopened.keys()) == [(PIECES[0].chunk_id, 0), (PIECES[0].chunk_id, 3)]
    assert reopened.used_bytes == 1000
    assert reopened.get(PIECES[3].chunk_id, 3) == PIECES[3]
    assert not (directory / "leftover.0.tmp").exists()


def test_piece_file_layout(tmp_path):
    store = PieceStore(tmp_path)
    store.put(PIECES[2])
    data = (tmp_path / f"{PIECES[2].chunk_id.hex()}.2").read_bytes()
    assert data[:PIECE_HEADER_SIZE] == (1000).to_bytes(8, "big") + bytes([4, 2])
    assert data[PIECE_HEADER_SIZE:] == PIECES[2].payload


def test_vanished_file(tmp_path):
    store = PieceStore(tmp_path)
    store.put(PIECES[0])
    (tmp_path / f"{PIECES[0].chunk_id.hex()}.0").unlink()
    assert store.get(PIECES[0].chunk_id, 0) is None
    assert len(store) == 0
