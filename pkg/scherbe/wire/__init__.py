# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .messages import (
    HEADER_SIZE,
    MAX_BODY,
    PROTOCOL_VERSION,
    Bind,
    BindReply,
    Cancel,
    ChunkStored,
    DeleteAck,
    DeleteFile,
    DeletePiece,
    ErrorCode,
    ErrorReply,
    FileEntry,
    FileList,
    GetMeta,
    GetPiece,
    ListFiles,
    Message,
    MetaReply,
    MissingList,
    MsgType,
    PieceAck,
    PieceKey,
    PieceReply,
    RefCount,
    Release,
    ReleaseReply,
    Scan,
    ScanReply,
    StoreAck,
    StoreChunk,
    StoreMeta,
    StorePiece,
    decode_frame,
    decode_message,
    encode_message,
    frame_length,
    message_types,
)
from .sim import LatencyModel, SimEndpoint, SimNetwork, VirtualClockEventLoop, run_simulation
from .sockets import SocketServer, SocketTransport, parse_address
from .transport import Handler, Transport

__all__ = [
    "HEADER_SIZE",
    "MAX_BODY",
    "PROTOCOL_VERSION",
    "Bind",
    "BindReply",
    "Cancel",
    "ChunkStored",
    "DeleteAck",
    "DeleteFile",
    "DeletePiece",
    "ErrorCode",
    "ErrorReply",
    "FileEntry",
    "FileList",
    "GetMeta",
    "GetPiece",
    "Handler",
    "LatencyModel",
    "ListFiles",
    "Message",
    "MetaReply",
    "MissingList",
    "MsgType",
    "PieceAck",
    "PieceKey",
    "PieceReply",
    "RefCount",
    "Release",
    "ReleaseReply",
    "Scan",
    "ScanReply",
    "SimEndpoint",
    "SimNetwork",
    "SocketServer",
    "SocketTransport",
    "StoreAck",
    "StoreChunk",
    "StoreMeta",
    "StorePiece",
    "Transport",
    "VirtualClockEventLoop",
    "decode_frame",
    "decode_message",
    "encode_message",
    "frame_length",
    "message_types",
    "parse_address",
    "run_simulation",
]
