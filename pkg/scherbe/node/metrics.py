# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Prometheus collectors of one node, each node owns its registry."""

from prometheus_client import CollectorRegistry, Counter, Gauge, start_http_server


class NodeMetrics:
    def __init__(self, address: str, registry: CollectorRegistry | None = None) -> None:
        self.address = address
        self.registry = registry or CollectorRegistry(auto_describe=True)
        self.pieces = Gauge("scherbe_node_pieces", "Code pieces stored on the node", registry=self.registry)
        self.piece_bytes = Gauge("scherbe_node_piece_bytes", "Payload bytes of stored code pieces", registry=self.registry)
        self.requests = Counter("scherbe_node_requests", "Requests served, by message type", ("msg_type",), registry=self.registry)
        self.request_errors = Counter(
            "scherbe_node_request_errors", "Requests answered with an error, by error code", ("code",), registry=self.registry
        )

    def observe_store(self, pieces: int, piece_bytes: int) -> None:
        self.pieces.set(pieces)
        self.piece_bytes.set(piece_bytes)

    def value(self, name: str, labels: dict[str, str] | None = None) -> float:
        return self.registry.get_sample_value(name, labels or {}) or 0.0

    def serve(self, port: int) -> None:
        """Expose the registry over HTTP on a background thread."""
        start_http_server(port, registry=self.registry)
