# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import os
import socket
from logging import getLogger

import numpy as np
import pytest
from pydantic import BaseModel

log = getLogger(__name__)


class SetEnv:
    def __init__(self):
        self.envars = set()

    def set(self, name, value):
        self.envars.add(name)
        os.environ[name] = value

    def pop(self, name):
        self.envars.remove(name)
        os.environ.pop(name)

    def clear(self):
        for n in self.envars:
            os.environ.pop(n, None)

    def get(self, name):
        return os.environ.get(name, None)

    def update(self, dic: dict):
        for k, v in dic.items():
            self.set(k, v)

    def set_from_settings(self, s: BaseModel, prefix: str = ""):
        dump = s.model_dump(mode="json")
        for k, v in dump.items():
            self.set(f"{prefix}{k}", str(v))


@pytest.fixture
def env():
    setenv = SetEnv()
    yield setenv

    setenv.clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def free_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def pytest_addoption(parser):
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="run tests that spawn node processes or replay long workloads",
    )


def pytest_collection_modifyitems(config, items):
    # Explicitly run test if only one is selected :)
    if len(items) == 1 or config.getoption("--slow"):
        return
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(pytest.mark.skip(reason="need --slow option to run"))
