# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import json
import logging

from scherbe.core.logging import JsonFormatter


class WithExtraFormatter(JsonFormatter):
    """Terminal formatter: `'message' : {extra}`, the correlation id included when a request is in scope."""

    def format(self, record: logging.LogRecord) -> str:
        super().format(record)
        json_part = self._get_output_dict(record)
        msg = json_part.pop("message")
        if self.reduced_levels and record.levelno in self.reduced_levels:
            for key in ("thread", "threadName", "processName", "process"):
                json_part.pop(key, None)
        for key in ("level", "@timestamp", "file"):
            json_part.pop(key, None)
        exc_text = json_part.pop("exc_text", "")
        return f"'{msg}'" + (f" : {json.dumps(json_part, default=repr)}" if json_part else "") + exc_text
