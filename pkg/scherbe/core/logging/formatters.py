# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""JSON log lines with the wire request id of the current request as correlation id."""

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from types import TracebackType
from typing import Any, Literal

from asgi_correlation_id import correlation_id

log = logging.getLogger(__name__)


def log_uncaught_exception(exc_type: type[BaseException], exc_value: BaseException, exc_traceback: TracebackType | None) -> None:
    log.exception("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


def setup_uncaught_exception_logging() -> None:
    sys.excepthook = log_uncaught_exception


@contextmanager
def request_scope(request_id: int) -> Iterator[str]:
    """Bind a wire request id to the correlation id of every log line emitted inside the scope."""
    token = correlation_id.set(f"{request_id:016x}")
    try:
        yield correlation_id.get()
    finally:
        correlation_id.reset(token)


# pylint: disable-next=too-many-positional-arguments
def warnings_to_logger(message, category, filename: str, lineno: int, file=None, line=None) -> None:
    """Replaces `warnings.showwarning`; the warning is logged under the name of the file that raised it."""
    # pylint: disable=unused-argument
    logging.getLogger(Path(filename).stem).warning(
        str(message), extra={"category": getattr(category, "__name__", str(category)), "source": f"{filename}:{lineno}"}
    )


def _make_dict_serializable(item: Any):
    match item:
        case dict():
            return {(k if isinstance(k, str) else repr(k)): _make_dict_serializable(v) for k, v in item.items() if v is not None}
        case bytes() | bytearray():
            # chunk ids and other digests
            return bytes(item).hex()
        case str() | int() | float() | bool():
            return item
        case list() | tuple() | set():
            return [_make_dict_serializable(i) for i in item]
        case _:
            return repr(item)


class JsonFormatter(logging.Formatter):
    """One JSON object per record; fields passed as `extra` land under "extra"."""

    key_blacklist = ["msg", "message", "args", "created", "msecs", "relativeCreated", "levelno", "filename", "module", "taskName"]

    def __init__(self, datefmt: str | None = "%Y-%m-%dT%H:%M:%S%z", reduced: list[str] | None = None) -> None:
        """Create a new Formatter.

        Args:
            datefmt: format of "@timestamp".
            reduced: levels whose lines drop logger, process and thread details.

        """
        super().__init__(None, datefmt)
        self.reduced_levels = [logging.getLevelNamesMapping().get(level) for level in reduced or []]

    def serialize_item(self, item: Any):
        return _make_dict_serializable(item)

    def _get_output_dict(self, record: logging.LogRecord) -> dict[str, Any]:
        data = {k: v for k, v in record.__dict__.items() if k not in self.key_blacklist and v is not None}
        func_name = data.pop("funcName")
        output = {
            "level": data.pop("levelname"),
            "message": record.getMessage(),
            "logger_name": data.pop("name") + ("" if func_name == "<module>" else f".{func_name}"),
            "file": f"{data.pop('pathname')}:{data.pop('lineno')}",
            "@timestamp": self.formatTime(record, self.datefmt),
            "process": f"{data.pop('processName')}({data.pop('process')})",
            "thread": f"{data.pop('threadName')}({data.pop('thread')})",
        }
        if data:
            output["extra"] = self.serialize_item(data)
        if (cor_id := correlation_id.get()) is not None:
            output["correlationId"] = cor_id
        if record.levelno in self.reduced_levels:
            for key in ("process", "logger_name", "thread"):
                del output[key]
        return output

    def format(self, record: logging.LogRecord) -> str:
        super().format(record)
        return json.dumps(self._get_output_dict(record), default=repr)


class JsonStringFormatter(JsonFormatter):
    """Serializes everything under the extra key into one json string."""

    def serialize_item(self, item: Any):
        return json.dumps(super().serialize_item(item))


def get_logging_dict_config(
    level: int | str,
    formatter: Literal[
        "scherbe.core.logging.JsonFormatter", "scherbe.core.logging.JsonStringFormatter"
    ] = "scherbe.core.logging.JsonFormatter",
) -> dict[str, Any]:
    """A `logging.config.dictConfig` dict writing JSON lines to stderr.

    The wire loggers are capped at WARNING unless DEBUG is requested, they log once per frame.
    """
    logger_template = {"level": level, "handlers": ["default"], "propagate": False}
    wire_level = level if level in ("DEBUG", logging.DEBUG) else "WARNING"
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"json_formatter": {"()": formatter, "reduced": ["INFO"]}},
        "handlers": {
            "default": {"level": level, "class": "logging.StreamHandler", "stream": "ext://sys.stderr", "formatter": "json_formatter"},
        },
        "loggers": {
            "": {**logger_template},
            "scherbe.wire": {**logger_template, "level": wire_level},
            "asyncio": {"level": "WARNING", "handlers": ["default"], "propagate": False},
        },
    }
