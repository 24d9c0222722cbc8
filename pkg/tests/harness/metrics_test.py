# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import pandas as pd
import pandera as pa
import pytest

from scherbe.erasure import encode_chunk
from scherbe.exceptions import UndefinedMetricError
from scherbe.harness import MetricsReport, check_consistency, consumed_bytes, dedup_ratio, hourly_series, summary_frame, write_report
from scherbe.harness.metrics import retrieval_frame
from scherbe.wire import ScanReply
from tests.helpers.deployment import random_bytes, simulate


def _report(**overrides) -> MetricsReport:
    values = {
        "binding_mode": "CLB",
        "n": 10,
        "k": 5,
        "dedup_ratio": 0.5,
        "original_bytes": 100,
        "consumed_bytes": 200,
        "piece_bytes": 190,
        "index_bytes": 10,
        "wire_bytes": 1000,
        "hourly_retrieval_ms": {9: 12.5, 10: 11.0},
        "daily_dedup": {1: 0.4, 2: 0.5},
    }
    values.update(overrides)
    return MetricsReport(**values)


def test_dedup_ratio_of_one_chunk():
    scans = [ScanReply(piece_bytes=8200, original_bytes=4096)]
    assert dedup_ratio(scans) == pytest.approx(0.4995, abs=1e-4)


def test_index_bytes_count_as_consumed():
    scans = [ScanReply(piece_bytes=800, header_bytes=40, meta_bytes=60, original_bytes=900), ScanReply(piece_bytes=200, index_bytes=100)]
    assert consumed_bytes(scans) == 1200
    assert consumed_bytes(scans, include_index=False) == 1000
    assert dedup_ratio(scans) == 0.75
    assert dedup_ratio(scans, include_index=False) == 0.9


@pytest.mark.parametrize(
    "scans",
    [
        pytest.param([], id="no-nodes"),
        pytest.param([ScanReply(), ScanReply()], id="empty-nodes"),
        pytest.param([ScanReply(piece_bytes=100)], id="orphans-only"),
    ],
)
def test_dedup_ratio_undefined(scans):
    with pytest.raises(UndefinedMetricError):
        dedup_ratio(scans)


def test_hourly_series():
    frame = retrieval_frame(
        [
            {"user": "a", "file_name": "f", "day": 0, "hour": 9, "duration_ms": 10.0, "bytes": 1},
            {"user": "b", "file_name": "f", "day": 1, "hour": 9, "duration_ms": 20.0, "bytes": 1},
            {"user": "a", "file_name": "g", "day": 0, "hour": 3, "duration_ms": 5.0, "bytes": 1},
        ]
    )
    assert hourly_series(frame) == {3: 5.0, 9: 15.0}
    assert hourly_series(retrieval_frame([])) == {}


def test_summary_frame():
    frame = summary_frame([_report(), _report(k=2, avg_retrieval_ms=7.5)])
    assert list(frame["k"]) == [5, 2]
    assert frame["avg_retrieval_ms"].isna().tolist() == [True, False]


def test_summary_frame_rejects_bad_rows():
    with pytest.raises(pa.errors.SchemaError):
        summary_frame([_report(binding_mode="RANDOM")])


def test_write_report(tmp_path):
    paths = write_report(_report(), tmp_path / "out")
    assert [path.name for path in paths] == ["summary.csv", "hourly.csv", "daily.csv"]
    assert pd.read_csv(paths[1]).to_dict("list") == {"hour": [9, 10], "avg_retrieval_ms": [12.5, 11.0]}
    assert list(pd.read_csv(paths[2]).columns) == ["day", "dedup_ratio"]
    assert pd.read_csv(paths[0])["dedup_ratio"].tolist() == [0.5]


class TestConsistency:
    @staticmethod
    async def _check(d):
        scans = await d.running.scan(d.harness, detail=True)
        return check_consistency(d.topology, scans, await d.running.stored_metas(d.harness))

    def test_consistent_after_uploads_and_deletes(self):
        async def body(d):
            alice, bob = d.client("alice"), d.client("bob")
            await alice.upload_bytes("a", random_bytes(60_000, seed=1))
            await alice.upload_bytes("b", random_bytes(30_000, seed=2))
            await bob.upload_bytes("c", random_bytes(60_000, seed=1))
            await alice.delete_file("b")
            return await self._check(d)

        report = simulate(body)
        assert report.ok
        assert report.files == 2
        assert report.piece_bytes == report.charged_bytes > 0

    def test_missing_and_orphan_pieces_are_reported(self):
        async def body(d):
            await d.client("alice").upload_bytes("a", random_bytes(20_000, seed=1))
            node = next(node for node in d.running.nodes.values() if len(node.pieces))
            chunk, index = next(node.pieces.keys())
            node.pieces.delete(chunk, index)
            node.pieces.put(encode_chunk(b"\x01" * 64, d.topology.params)[0])
            return await self._check(d)

        report = simulate(body)
        assert not report.ok
        assert report.missing_pieces == 1
        assert report.orphan_pieces == 1
        assert report.refcount_mismatches == 0


class TestDedupOnDeployment:
    def test_second_copy_doubles_the_ratio(self):
        data = random_bytes(60_000, seed=8)

        async def body(d):
            client = d.client("alice")
            await client.upload_bytes("a", data)
            single = dedup_ratio((await d.scans()).values())
            await client.upload_bytes("b", data)
            return single, dedup_ratio((await d.scans()).values())

        single, double = simulate(body)
        assert double == pytest.approx(2 * single, rel=0.02)

    def test_unique_data_costs_n_over_k(self):
        async def body(d):
            await d.client("alice").upload_bytes("a", random_bytes(200_000, seed=9))
            return dedup_ratio((await d.scans()).values(), include_index=False)

        assert simulate(body) == pytest.approx(2 / 4, rel=0.01)
