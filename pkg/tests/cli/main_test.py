# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from scherbe.cli import EXIT_NOT_FOUND, EXIT_OTHER, EXIT_UNRECOVERABLE, __version__, exit_code
from scherbe.cli._main import app
from scherbe.exceptions import ConfigError, CorruptChunkError, NotFoundError, TransportError, UnrecoverableChunkError
from scherbe.harness import build_topology
from scherbe.topology import TopologyLoader
from tests.helpers.deployment import small_settings

runner = CliRunner()

SMALL_EXPERIMENT = """\
N=4
K=2
CLUSTERS=2
WORKLOAD__USERS=2
WORKLOAD__FILES_PER_USER=2
WORKLOAD__MIN_FILE_SIZE=8192
WORKLOAD__MAX_FILE_SIZE=32768
WORKLOAD__DAYS=1
WORKLOAD__GETS_PER_USER=3
"""


@pytest.fixture
def topology_file(tmp_path, free_port):
    path = tmp_path / "topology.yaml"
    TopologyLoader.dump(build_topology(small_settings(TRANSPORT="sockets", BASE_PORT=free_port, CLUSTERS=1, N=2, K=1), ["alice"]), path)
    return path


@pytest.fixture
def experiment_file(tmp_path):
    path = tmp_path / "experiment.env"
    path.write_text(SMALL_EXPERIMENT, encoding="utf-8")
    return path


@pytest.mark.parametrize(
    "err,code",
    [
        pytest.param(NotFoundError("f"), EXIT_NOT_FOUND, id="not-found"),
        pytest.param(UnrecoverableChunkError(b"\x00" * 20, "2 of 10"), EXIT_UNRECOVERABLE, id="unrecoverable"),
        pytest.param(CorruptChunkError("no subset"), EXIT_UNRECOVERABLE, id="corrupt"),
        pytest.param(TransportError("refused"), EXIT_OTHER, id="transport"),
        pytest.param(ConfigError("bad"), EXIT_OTHER, id="config"),
    ],
)
def test_exit_code(err, code):
    assert exit_code(err) == code


def test_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_help_lists_command_groups():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    assert all(group in result.stdout for group in ("node", "client", "harness"))


class TestNodeCheck:
    def test_valid(self, topology_file):
        result = runner.invoke(app, ["node", "check", str(topology_file)])
        assert result.exit_code == 0
        assert "1 clusters, 2 nodes" in result.stdout

    def test_semantic_errors(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text(
            "n: 3\nk: 4\nclusters:\n  - id: 0\n    capacity: 10\n    members: [a, b]\nusers:\n  alice:\n    switch: z\n",
            encoding="utf-8",
        )
        result = runner.invoke(app, ["node", "check", str(path)])
        assert result.exit_code == 1
        assert "k=4 exceeds n=3" in result.output
        assert "unknown node z" in result.output

    def test_schema_error(self, tmp_path):
        path = tmp_path / "nonsense.yaml"
        path.write_text("clusters: 5\n", encoding="utf-8")
        result = runner.invoke(app, ["node", "check", str(path)])
        assert result.exit_code == 1
        assert "Schema error" in result.output


class TestClient:
    def test_unreachable_switch(self, topology_file, tmp_path):
        path = tmp_path / "hello.txt"
        path.write_text("hello", encoding="utf-8")
        result = runner.invoke(app, ["client", "-u", "alice", "-t", str(topology_file), "put", str(path)])
        assert result.exit_code == EXIT_OTHER
        assert "Error:" in result.output

    def test_unknown_user(self, topology_file):
        result = runner.invoke(app, ["client", "-u", "mallory", "-t", str(topology_file), "ls"])
        assert result.exit_code == EXIT_OTHER

    def test_sync_needs_cache_dir(self, topology_file):
        result = runner.invoke(app, ["client", "-u", "alice", "-t", str(topology_file), "sync"])
        assert result.exit_code == EXIT_OTHER
        assert "--cache-dir" in result.output


class TestHarness:
    def test_gen_workload(self, tmp_path, experiment_file):
        out = tmp_path / "workloads" / "w.json"
        result = runner.invoke(app, ["harness", "gen-workload", "--out", str(out), "--seed", "7", "--config", str(experiment_file)])
        assert result.exit_code == 0
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["seed"] == 7
        assert len(data["files"]) == 4

    def test_run(self, tmp_path, experiment_file):
        out = tmp_path / "results"
        result = runner.invoke(app, ["harness", "run", "--config", str(experiment_file), "--out", str(out)])
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(out / "summary.csv")
        assert summary.loc[0, "uploads"] == 4
        assert summary.loc[0, "failures"] == 0
        assert "dedup_ratio=" in result.stdout

    def test_sweep_rejects_large_k(self, tmp_path, experiment_file):
        args = ["harness", "sweep-k", "--k", "2,9", "--config", str(experiment_file), "--out", str(tmp_path / "k.csv")]
        result = runner.invoke(app, args)

        assert result.exit_code == EXIT_OTHER
        assert "outside 1..4" in result.output

    def test_sweep_rejects_bad_list(self, experiment_file):
        result = runner.invoke(app, ["harness", "sweep-k", "--k", "two", "--config", str(experiment_file)])
        assert result.exit_code != 0

    def test_missing_config(self, tmp_path):
        result = runner.invoke(app, ["harness", "run", "--config", str(tmp_path / "missing.env")])
        assert result.exit_code == EXIT_OTHER
        assert "config file not found" in result.output
