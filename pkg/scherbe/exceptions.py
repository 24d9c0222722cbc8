# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""contains custom exceptions of the store."""

import logging

log = logging.getLogger(__name__)


class LoggedCustomException(Exception):
    """custom logged exception class."""

    def __init__(self, message):
        """Constructor."""
        self.message = message
        super().__init__(message)
        log.exception(self)

    def __repr__(self) -> str:
        return f"{str(self.__class__.__name__)}: {self.message}"

    def __str__(self) -> str:
        return self.__repr__()


class ScherbeError(Exception):
    """root of all expected domain errors."""


class ConfigError(ScherbeError, ValueError):
    """raised when settings or topology are inconsistent."""


class TopologyError(ConfigError):
    """raised when a cluster topology is invalid, names the offending node."""


class ChunkingError(ScherbeError, ValueError):
    """raised when chunking parameters are unusable."""


class ErasureCodingError(ScherbeError, ValueError):
    """raised when a chunk can not be encoded."""


class InsufficientPiecesError(ErasureCodingError):
    """raised when fewer than k distinct pieces are supplied."""


class InconsistentPiecesError(ErasureCodingError):
    """raised when pieces disagree on chunk id, params or length."""


class SingularMatrixError(ErasureCodingError):
    """raised when a GF(2^8) matrix has no inverse."""


class DigestMismatchError(ErasureCodingError):
    """raised when no tried k-subset of pieces decodes to the chunk id."""


class MetadataError(ScherbeError, ValueError):
    """raised for malformed file meta-data."""


class RefCountCorruptionError(LoggedCustomException):
    """raised when a reference count would drop below zero."""


class BindingError(ScherbeError):
    """raised when no cluster can be selected."""


class CapacityExhaustedError(BindingError):
    """raised when no cluster or node has space for a chunk."""


class NotFoundError(ScherbeError, KeyError):
    """raised when a file, piece or user is unknown."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else self.__class__.__name__


class IntegrityError(LoggedCustomException):
    """raised when a payload does not match its chunk id."""


class PartialStoreError(LoggedCustomException):
    """raised when the piece fan-out of a chunk failed and was rolled back."""


class NotResponsibleError(ScherbeError):
    """raised when a node is asked for a role it does not hold for that user or cluster."""


class UnrecoverableChunkError(ScherbeError):
    """raised when fewer than k pieces of a chunk can be obtained."""

    def __init__(self, chunk_id: bytes, detail: str = ""):
        self.chunk_id = chunk_id
        super().__init__(f"chunk {chunk_id.hex()} is unrecoverable" + (f": {detail}" if detail else ""))


class CorruptChunkError(LoggedCustomException):
    """raised when no subset of received pieces decodes to the expected digest."""


class WireError(ScherbeError):
    """base of all protocol decode and encode errors."""


class IncompleteFrameError(WireError):
    """raised when the buffer does not yet hold a full frame, nothing is consumed."""

    def __init__(self, needed: int):
        self.needed = needed
        super().__init__(f"incomplete frame, {needed} more bytes needed")


class UnknownMessageTypeError(WireError):
    """raised for a msg_type code outside the catalogue."""

    def __init__(self, code: int, request_id: int = 0):
        self.code = code
        self.request_id = request_id
        super().__init__(f"unknown message type 0x{code:02x}")


class MalformedFrameError(WireError):
    """raised for bad length fields or short bodies."""


class FrameTooLargeError(WireError):
    """raised when a body exceeds the protocol limit."""


class TransportError(ScherbeError):
    """raised when a peer can not be reached or the connection broke."""


class RoutingError(TransportError):
    """raised when the simulator does not know an endpoint."""


class RemoteError(ScherbeError):
    """raised on the requesting side for an ErrorReply of a node."""

    def __init__(self, code, detail: str):
        self.code = code
        self.detail = detail
        super().__init__(f"{getattr(code, 'name', code)}: {detail}")


class SimulationStalledError(ScherbeError, RuntimeError):
    """raised when the virtual clock has nothing left to run but the main task still waits."""


class UndefinedMetricError(ScherbeError, ValueError):
    """raised when a metric is requested on an empty system."""
