# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

from scherbe.chunking import Chunk, chunk_id, chunk_stream
from scherbe.exceptions import MetadataError, RefCountCorruptionError
from scherbe.metadata import ChunkRef, FileMeta, RefCountTable, apply_refcounts, build_file_meta, missing_chunks, sync_meta


def _chunk(payload: bytes) -> Chunk:
    return Chunk(id=chunk_id(payload), payload=payload)


A, B, C = (_chunk(payload) for payload in (b"alpha", b"bravo", b"charlie"))


def _meta(name: str, *chunks: Chunk, timestamp: int = 1, user: str = "alice") -> FileMeta:
    return build_file_meta(user, name, list(chunks), [0] * len(chunks), timestamp)


def _ref(chunk: Chunk) -> ChunkRef:
    return ChunkRef(chunk_id=chunk.id, cluster_id=0)


class TestBuildFileMeta:
    def test_repeated_payloads_share_ids(self):
        meta = _meta("f", A, B, A)
        assert len(meta.chunks) == 3
        assert meta.chunks[0] == meta.chunks[2]
        assert meta.total_len == 2 * A.length + B.length
        assert meta.distinct_refs() == [_ref(A), _ref(B)]

    def test_empty_file(self):
        meta = _meta("empty")
        assert meta.chunks == ()
        assert meta.total_len == 0

    def test_entry_count_follows_chunking(self, rng):
        chunks = chunk_stream(rng.bytes(1024 * 1024))
        meta = build_file_meta("alice", "big", chunks, [1] * len(chunks), 5)
        assert len(meta.chunks) == len(chunks)
        assert meta.total_len == 1024 * 1024

    def test_length_mismatch(self):
        with pytest.raises(MetadataError):
            build_file_meta("alice", "f", [A, B], [0], 1)


@pytest.mark.parametrize(
    "chunks,known,expected",
    [
        pytest.param((A, B, A), set(), [A, B], id="repeated-id"),
        pytest.param((A, B), {A.id, B.id}, [], id="fully-present"),
        pytest.param((A, B, C), {B.id}, [A, C], id="set-difference"),
    ],
)
def test_missing_chunks(chunks, known, expected):
    meta = _meta("f", *chunks)
    assert missing_chunks(meta, known) == [_ref(chunk) for chunk in expected]


def test_missing_chunks_properties(rng):
    payloads = [bytes([value]) * 10 for value in rng.integers(0, 8, size=40)]
    meta = _meta("f", *(_chunk(payload) for payload in payloads))
    assert missing_chunks(meta, {ref.chunk_id for ref in meta.chunks}) == []
    everything = missing_chunks(meta, set())
    assert [ref.chunk_id for ref in everything] == list(dict.fromkeys(ref.chunk_id for ref in meta.chunks))


class TestSyncMeta:
    @pytest.mark.parametrize(
        "local_ts,remote_ts,winner",
        [
            pytest.param(100, 200, "remote", id="remote-newer"),
            pytest.param(200, 100, "local", id="local-newer"),
            pytest.param(150, 150, "remote", id="tie-goes-to-remote"),
        ],
    )
    def test_last_writer_wins(self, local_ts, remote_ts, winner):
        local = _meta("f", A, timestamp=local_ts)
        remote = _meta("f", B, timestamp=remote_ts)
        assert sync_meta(local, remote) == {"local": local, "remote": remote}[winner]

    def test_one_side_present(self):
        meta = _meta("f", A)
        assert sync_meta(meta, None) == meta
        assert sync_meta(None, meta) == meta

    def test_both_absent(self):
        with pytest.raises(MetadataError):
            sync_meta(None, None)

    @pytest.mark.parametrize(
        "other",
        [
            pytest.param(_meta("g", A), id="other-name"),
            pytest.param(_meta("f", A, user="bob"), id="other-user"),
        ],
    )
    def test_different_files(self, other):
        with pytest.raises(MetadataError):
            sync_meta(_meta("f", A), other)

    def test_idempotent_and_commutative(self, rng):
        for _ in range(200):
            first, second = (int(value) for value in rng.integers(0, 1000, size=2))
            a = _meta("f", A, timestamp=first)
            b = _meta("f", B, timestamp=second)
            merged = sync_meta(a, b)
            assert sync_meta(a, merged) == merged
            assert merged.timestamp == max(first, second)
            if first != second:
                assert sync_meta(b, a) == merged


class TestRefCounts:
    def test_add_and_remove(self):
        table = RefCountTable()
        first = _meta("one", A, B)
        second = _meta("two", B, C)
        assert apply_refcounts(table, first, 1) == set()
        assert apply_refcounts(table, second, 1) == set()
        assert [table.count(_ref(chunk)) for chunk in (A, B, C)] == [1, 2, 1]

        assert apply_refcounts(table, first, -1) == {_ref(A)}
        assert table.snapshot() == {_ref(B): 1, _ref(C): 1}
        assert _ref(A) not in table

    def test_repeated_chunk_counted_once_per_file(self):
        table = RefCountTable()
        apply_refcounts(table, _meta("f", A, A, A), 1)
        assert table.count(_ref(A)) == 1

    def test_unknown_ref_is_corruption_and_leaves_table(self):
        table = RefCountTable()
        apply_refcounts(table, _meta("one", A), 1)
        before = table.snapshot()
        with pytest.raises(RefCountCorruptionError):
            apply_refcounts(table, _meta("two", A, C), -1)
        assert table.snapshot() == before

    def test_counts_are_per_cluster(self):
        table = RefCountTable()
        apply_refcounts(table, build_file_meta("alice", "f", [A], [0], 1), 1)
        apply_refcounts(table, build_file_meta("bob", "f", [A], [1], 1), 1)
        assert table.count(ChunkRef(chunk_id=A.id, cluster_id=0)) == 1
        assert table.count(ChunkRef(chunk_id=A.id, cluster_id=1)) == 1

    def test_incremental_matches_recount(self, rng):
        pool = [_chunk(bytes([value]) * 32) for value in range(12)]
        table = RefCountTable()
        stored: dict[str, FileMeta] = {}
        for step in range(300):
            name = f"file-{int(rng.integers(0, 15))}"
            if name in stored and rng.random() < 0.4:
                apply_refcounts(table, stored.pop(name), -1)
            else:
                picks = rng.choice(len(pool), size=int(rng.integers(0, 6)))
                meta = _meta(name, *(pool[pick] for pick in picks), timestamp=step)
                if name in stored:
                    apply_refcounts(table, stored[name], -1)
                apply_refcounts(table, meta, 1)
                stored[name] = meta
            assert table == RefCountTable.recount(stored.values())
        assert all(count > 0 for count in table.snapshot().values())
        assert np.sum(list(table.snapshot().values())) == sum(len(meta.distinct_refs()) for meta in stored.values())
