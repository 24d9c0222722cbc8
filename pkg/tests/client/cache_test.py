# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import pytest

from scherbe.chunking import chunk_id, chunk_stream
from scherbe.client import LocalCache
from scherbe.exceptions import IntegrityError
from scherbe.metadata import build_file_meta


def _meta(user="alice", name="f", timestamp=1):
    chunks = chunk_stream(b"cached content " * 10)
    return build_file_meta(user, name, chunks, [0] * len(chunks), timestamp)


def test_put_and_get():
    cache = LocalCache(budget=1000)
    digest = cache.put(b"abc")
    assert digest == chunk_id(b"abc")
    assert cache.get(digest) == b"abc"
    assert digest in cache
    assert cache.used_bytes == 3
    assert cache.get(chunk_id(b"other")) is None


def test_digest_mismatch():
    cache = LocalCache()
    with pytest.raises(IntegrityError):
        cache.put(b"abc", chunk_id(b"abd"))
    assert len(cache) == 0


def test_lru_eviction():
    cache = LocalCache(budget=300)
    a, b, c = (cache.put(bytes([value]) * 100) for value in (1, 2, 3))
    cache.get(a)
    d = cache.put(bytes([4]) * 100)
    assert b not in cache
    assert all(digest in cache for digest in (a, c, d))
    assert cache.used_bytes == 300


def test_oversized_payload_is_not_cached():
    cache = LocalCache(budget=10)
    digest = cache.put(b"x" * 11)
    assert digest not in cache
    assert cache.used_bytes == 0


def test_zero_budget_keeps_metas():
    cache = LocalCache(budget=0)
    cache.put(b"abc")
    cache.put_meta(_meta())
    assert len(cache) == 0
    assert cache.get_meta("alice", "f") == _meta()


def test_metas():
    cache = LocalCache()
    cache.put_meta(_meta(name="a"))
    cache.put_meta(_meta(name="b", timestamp=5))
    cache.put_meta(_meta(user="bob"))
    assert sorted(meta.file_name for meta in cache.user_metas("alice")) == ["a", "b"]
    assert cache.remove_meta("alice", "a").file_name == "a"
    assert cache.get_meta("alice", "a") is None
    assert cache.remove_meta("alice", "a") is None


def test_persistence(tmp_path):
    cache = LocalCache(budget=1000, directory=tmp_path)
    digest = cache.put(b"persisted")
    cache.put_meta(_meta())

    reopened = LocalCache(budget=1000, directory=tmp_path)
    assert reopened.get(digest) == b"persisted"
    assert reopened.get_meta("alice", "f") == _meta()
    assert (tmp_path / "chunks" / digest.hex()).read_bytes() == b"persisted"


def test_evicted_chunks_leave_disk(tmp_path):
    cache = LocalCache(budget=100, directory=tmp_path)
    first = cache.put(b"a" * 100)
    cache.put(b"b" * 100)
    assert not (tmp_path / "chunks" / first.hex()).exists()


def test_corrupt_chunks_dropped_on_load(tmp_path):
    LocalCache(directory=tmp_path).put(b"good")
    (tmp_path / "chunks" / chunk_id(b"expected").hex()).write_bytes(b"tampered")
    (tmp_path / "chunks" / "not-hex").write_bytes(b"junk")

    cache = LocalCache(directory=tmp_path)
    assert len(cache) == 1
    assert chunk_id(b"good") in cache
    assert sorted(path.name for path in (tmp_path / "chunks").iterdir()) == [chunk_id(b"good").hex()]
