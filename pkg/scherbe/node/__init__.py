# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .daemon import run_node, serve_node
from .metrics import NodeMetrics
from .piece_store import PIECE_HEADER_SIZE, PieceStore
from .server import StorageNode, error_reply
from .settings import NodeSettings

__all__ = ["PIECE_HEADER_SIZE", "NodeMetrics", "NodeSettings", "PieceStore", "StorageNode", "error_reply", "run_node", "serve_node"]
