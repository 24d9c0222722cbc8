# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import json
import logging
import logging.config
import sys

import pytest
from asgi_correlation_id import correlation_id

from scherbe.core.logging import (
    JsonFormatter,
    JsonStringFormatter,
    get_logging_dict_config,
    log_uncaught_exception,
    request_scope,
    setup_uncaught_exception_logging,
    warnings_to_logger,
)

FOR_EACH_LOG_LEVEL = pytest.mark.parametrize(
    "level",
    [pytest.param(v, id=k) for k, v in logging.getLevelNamesMapping().items() if k != "NOTSET"],
)
FOR_EACH_LOGGER = pytest.mark.parametrize("loggername", ["root", "new_one", ""])
FOR_EACH_FORMATTER = pytest.mark.parametrize("formatter", [JsonFormatter(), JsonStringFormatter()])


def _configure(formatter: logging.Formatter) -> None:
    handler = logging.StreamHandler()
    handler.setLevel("DEBUG")
    handler.setFormatter(formatter)
    logging.basicConfig(level=logging.DEBUG, handlers=[handler], force=True)


@FOR_EACH_LOG_LEVEL
@FOR_EACH_LOGGER
@FOR_EACH_FORMATTER
def test_logging(capsys, level, loggername, formatter):
    _configure(formatter)
    logging.getLogger(loggername).log(level, "hi")
    out = capsys.readouterr().err.splitlines()[0]
    assert "hi" in out
    assert logging.getLevelName(level) in out
    assert json.loads(out)


@FOR_EACH_LOG_LEVEL
@FOR_EACH_LOGGER
@FOR_EACH_FORMATTER
def test_logging_extra_data(capsys, level, loggername, formatter):
    _configure(formatter)
    logging.getLogger(loggername).log(level, "hi", extra={"a": 1, "chunk": b"\x0a\x0b"})
    data = json.loads(capsys.readouterr().err.splitlines()[0])
    assert "extra" in data
    if isinstance(formatter, JsonStringFormatter):
        # extra is one json string
        assert isinstance(data["extra"], str)
        data_extra = json.loads(data["extra"])
    else:
        data_extra = data["extra"]
    assert data_extra == {"a": 1, "chunk": "0a0b"}


@FOR_EACH_LOGGER
def test_request_scope_sets_correlation_id(capsys, loggername):
    _configure(JsonFormatter())
    with request_scope(0x2A) as cid:
        logging.getLogger(loggername).warning("inside")
    logging.getLogger(loggername).warning("outside")
    inside, outside = (json.loads(line) for line in capsys.readouterr().err.splitlines()[:2])
    assert cid == "000000000000002a"
    assert inside["correlationId"] == cid
    assert "correlationId" not in outside
    assert correlation_id.get() is None


def test_request_scopes_nest():
    with request_scope(1):
        with request_scope(2) as inner:
            assert correlation_id.get() == inner
        assert correlation_id.get() == "0000000000000001"


def test_reduced_levels_drop_process_details():
    formatter = JsonFormatter(reduced=["INFO"])
    record = logging.LogRecord("scherbe.node", logging.INFO, "server.py", 3, "stored", (), None)
    output = formatter._get_output_dict(record)
    assert "process" not in output and "thread" not in output
    record.levelno = logging.ERROR
    assert "process" in formatter._get_output_dict(record)


@pytest.mark.parametrize("level,wire_level", [("INFO", "WARNING"), ("DEBUG", "DEBUG")])
def test_dict_config_caps_wire_loggers(level, wire_level):
    config = get_logging_dict_config(level)
    assert config["loggers"]["scherbe.wire"]["level"] == wire_level
    assert config["loggers"][""]["level"] == level
    logging.config.dictConfig(config)
    assert logging.getLogger("scherbe.wire.sim").getEffectiveLevel() == logging.getLevelName(wire_level)


def test_setup_uncaught_exception_logging():
    original_hook = sys.excepthook
    try:
        setup_uncaught_exception_logging()
        assert sys.excepthook == log_uncaught_exception
    finally:
        sys.excepthook = original_hook


def test_log_uncaught_exception(caplog):
    try:
        raise ValueError("Test exception")
    except ValueError:
        exc_type, exc_value, exc_traceback = sys.exc_info()

    with caplog.at_level(logging.ERROR):
        log_uncaught_exception(exc_type, exc_value, exc_traceback)

    assert "Uncaught exception" in caplog.text
    assert "Test exception" in caplog.text


def test_warnings_are_logged_under_the_raising_file(caplog):
    with caplog.at_level(logging.WARNING):
        warnings_to_logger("stale lock", DeprecationWarning, "/srv/scherbe/node/server.py", 42)
    record = caplog.records[-1]
    assert record.name == "server"
    assert record.getMessage() == "stale lock"
    assert record.category == "DeprecationWarning"
    assert record.source == "/srv/scherbe/node/server.py:42"
