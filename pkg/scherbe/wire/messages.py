# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Message catalogue and frame codec.

Every frame is `u32 total length (header included) | u8 msg_type | u64 request_id | body`,
integers big-endian. Replies echo the request id of the request they answer.

```python
from scherbe.wire import GetPiece, decode_message, encode_message

frame = encode_message(GetPiece(request_id=7, chunk_id=bytes(20), index=3))
print(len(frame))
#> 34
print(decode_message(frame + b"leftover").index)
#> 3
```
"""

import struct
from enum import IntEnum
from typing import Any, ClassVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from scherbe.chunking import CHUNK_ID_SIZE, ChunkId
from scherbe.core.buffers import ByteReader, ByteWriter
from scherbe.erasure import CodedPiece, CodingParams
from scherbe.exceptions import (
    CapacityExhaustedError,
    FrameTooLargeError,
    IncompleteFrameError,
    IntegrityError,
    MalformedFrameError,
    NotFoundError,
    NotResponsibleError,
    PartialStoreError,
    RemoteError,
    ScherbeError,
    UnknownMessageTypeError,
)
from scherbe.metadata import ChunkRef, ClusterId, FileMeta, read_chunk_ref, read_file_meta, write_chunk_ref, write_file_meta

PROTOCOL_VERSION = 1
HEADER = struct.Struct(">IBQ")
HEADER_SIZE = HEADER.size
MAX_BODY = 2**32 - 1 - HEADER_SIZE


class MsgType(IntEnum):
    STORE_META = 0x01
    MISSING_LIST = 0x02
    GET_META = 0x03
    META_REPLY = 0x04
    STORE_CHUNK = 0x05
    STORE_ACK = 0x06
    STORE_PIECE = 0x07
    PIECE_ACK = 0x08
    GET_PIECE = 0x09
    PIECE_REPLY = 0x0A
    DELETE_FILE = 0x0B
    DELETE_ACK = 0x0C
    DELETE_PIECE = 0x0D
    CANCEL = 0x0E
    LIST_FILES = 0x10
    FILE_LIST = 0x11
    BIND = 0x12
    BIND_REPLY = 0x13
    RELEASE = 0x14
    RELEASE_REPLY = 0x15
    CHUNK_STORED = 0x16
    SCAN = 0x17
    SCAN_REPLY = 0x18
    ERROR_REPLY = 0x7F


class ErrorCode(IntEnum):
    NOT_FOUND = 1
    INTEGRITY = 2
    CAPACITY = 3
    PROTOCOL = 4
    PARTIAL_STORE = 5
    INTERNAL = 6
    NOT_RESPONSIBLE = 7


_REGISTRY: dict[int, type["Message"]] = {}


class Message(BaseModel):
    """Base of all messages; subclasses define MSG_TYPE and their body layout."""

    model_config = ConfigDict(frozen=True)

    MSG_TYPE: ClassVar[MsgType]
    IS_REPLY: ClassVar[bool] = False

    request_id: int = Field(0, ge=0, lt=2**64)

    @classmethod
    def __pydantic_init_subclass__(cls, **kwargs: Any) -> None:
        super().__pydantic_init_subclass__(**kwargs)
        if "MSG_TYPE" in cls.__dict__:
            if cls.MSG_TYPE in _REGISTRY:
                raise TypeError(f"message type {cls.MSG_TYPE!r} registered twice")
            _REGISTRY[cls.MSG_TYPE] = cls

    def write_body(self, writer: ByteWriter) -> None:
        """Append the body fields."""

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        """Field values of a body, request_id excluded."""
        return {}


def _write_piece(writer: ByteWriter, piece: CodedPiece) -> None:
    writer.raw(piece.chunk_id).u8(piece.index).u8(piece.params.n).u8(piece.params.k).u64(piece.original_len).blob(piece.payload)


def _read_piece(reader: ByteReader) -> CodedPiece:
    chunk_id, index, n, k = reader.raw(CHUNK_ID_SIZE), reader.u8(), reader.u8(), reader.u8()
    original_len = reader.u64()
    return CodedPiece(chunk_id=chunk_id, index=index, params=CodingParams(n=n, k=k), original_len=original_len, payload=reader.blob())


def _write_refs(writer: ByteWriter, refs: list[ChunkRef]) -> None:
    writer.u32(len(refs))
    for ref in refs:
        write_chunk_ref(writer, ref)


def _read_refs(reader: ByteReader) -> list[ChunkRef]:
    return [read_chunk_ref(reader) for _ in range(reader.u32())]


class PieceKey(BaseModel):
    model_config = ConfigDict(frozen=True)

    chunk_id: ChunkId
    index: int = Field(ge=0, le=255)


class RefCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    ref: ChunkRef
    count: int = Field(ge=1, lt=2**32)


class FileEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    file_name: str
    timestamp: int = Field(ge=0)


class StoreMeta(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.STORE_META

    user: str
    meta: FileMeta
    chunk_lengths: list[int] = Field(default_factory=list)

    def write_body(self, writer: ByteWriter) -> None:
        writer.text(self.user)
        write_file_meta(writer, self.meta)
        writer.u32(len(self.chunk_lengths))
        for length in self.chunk_lengths:
            writer.u32(length)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        user, meta = reader.text(), read_file_meta(reader)
        return {"user": user, "meta": meta, "chunk_lengths": [reader.u32() for _ in range(reader.u32())]}


class MissingList(Message):
    """Binding outcome of a StoreMeta; `accepted` is False when the switching node kept a newer copy."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.MISSING_LIST
    IS_REPLY: ClassVar[bool] = True

    accepted: bool = True
    missing: list[ChunkRef] = Field(default_factory=list)
    placements: list[ClusterId] = Field(default_factory=list)

    def write_body(self, writer: ByteWriter) -> None:
        writer.u8(int(self.accepted))
        _write_refs(writer, self.missing)
        writer.u32(len(self.placements))
        for cluster_id in self.placements:
            writer.u16(cluster_id)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        accepted, missing = bool(reader.u8()), _read_refs(reader)
        return {"accepted": accepted, "missing": missing, "placements": [reader.u16() for _ in range(reader.u32())]}


class GetMeta(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.GET_META

    user: str
    file_name: str

    def write_body(self, writer: ByteWriter) -> None:
        writer.text(self.user).text(self.file_name)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"user": reader.text(), "file_name": reader.text()}


class MetaReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.META_REPLY
    IS_REPLY: ClassVar[bool] = True

    meta: FileMeta | None = None

    def write_body(self, writer: ByteWriter) -> None:
        writer.u8(self.meta is not None)
        if self.meta is not None:
            write_file_meta(writer, self.meta)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"meta": read_file_meta(reader) if reader.u8() else None}


class StoreChunk(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.STORE_CHUNK

    chunk_id: ChunkId
    cluster_id: ClusterId
    payload: bytes

    def write_body(self, writer: ByteWriter) -> None:
        writer.raw(self.chunk_id).u16(self.cluster_id).blob(self.payload)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"chunk_id": reader.raw(CHUNK_ID_SIZE), "cluster_id": reader.u16(), "payload": reader.blob()}


class StoreAck(Message):
    """`kept` is False when nobody referenced the chunk anymore and its pieces were dropped."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.STORE_ACK
    IS_REPLY: ClassVar[bool] = True

    chunk_id: ChunkId
    kept: bool = True

    def write_body(self, writer: ByteWriter) -> None:
        writer.raw(self.chunk_id).u8(int(self.kept))

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"chunk_id": reader.raw(CHUNK_ID_SIZE), "kept": bool(reader.u8())}


class StorePiece(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.STORE_PIECE

    piece: CodedPiece

    def write_body(self, writer: ByteWriter) -> None:
        _write_piece(writer, self.piece)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"piece": _read_piece(reader)}


class PieceAck(Message):
    """`created` is False when the node already held that piece."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.PIECE_ACK
    IS_REPLY: ClassVar[bool] = True

    chunk_id: ChunkId
    index: int = Field(ge=0, le=255)
    created: bool = True

    def write_body(self, writer: ByteWriter) -> None:
        writer.raw(self.chunk_id).u8(self.index).u8(int(self.created))

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"chunk_id": reader.raw(CHUNK_ID_SIZE), "index": reader.u8(), "created": bool(reader.u8())}


class GetPiece(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.GET_PIECE

    chunk_id: ChunkId
    index: int = Field(ge=0, le=255)

    def write_body(self, writer: ByteWriter) -> None:
        writer.raw(self.chunk_id).u8(self.index)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"chunk_id": reader.raw(CHUNK_ID_SIZE), "index": reader.u8()}


class PieceReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.PIECE_REPLY
    IS_REPLY: ClassVar[bool] = True

    piece: CodedPiece | None = None

    def write_body(self, writer: ByteWriter) -> None:
        writer.u8(self.piece is not None)
        if self.piece is not None:
            _write_piece(writer, self.piece)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"piece": _read_piece(reader) if reader.u8() else None}


class DeleteFile(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.DELETE_FILE

    user: str
    file_name: str

    def write_body(self, writer: ByteWriter) -> None:
        writer.text(self.user).text(self.file_name)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"user": reader.text(), "file_name": reader.text()}


class DeleteAck(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.DELETE_ACK
    IS_REPLY: ClassVar[bool] = True

    existed: bool = True

    def write_body(self, writer: ByteWriter) -> None:
        writer.u8(int(self.existed))

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"existed": bool(reader.u8())}


class DeletePiece(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.DELETE_PIECE

    chunk_id: ChunkId
    index: int = Field(ge=0, le=255)

    def write_body(self, writer: ByteWriter) -> None:
        writer.raw(self.chunk_id).u8(self.index)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"chunk_id": reader.raw(CHUNK_ID_SIZE), "index": reader.u8()}


class Cancel(Message):
    """Best-effort abort of the request `target` sent earlier on the same link; never answered."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.CANCEL

    target: int = Field(ge=0, lt=2**64)

    def write_body(self, writer: ByteWriter) -> None:
        writer.u64(self.target)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"target": reader.u64()}


class ListFiles(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.LIST_FILES

    user: str

    def write_body(self, writer: ByteWriter) -> None:
        writer.text(self.user)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"user": reader.text()}


class FileList(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.FILE_LIST
    IS_REPLY: ClassVar[bool] = True

    files: list[FileEntry] = Field(default_factory=list)

    def write_body(self, writer: ByteWriter) -> None:
        writer.u32(len(self.files))
        for entry in self.files:
            writer.text(entry.file_name).u64(entry.timestamp)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"files": [FileEntry(file_name=reader.text(), timestamp=reader.u64()) for _ in range(reader.u32())]}


class Bind(Message):
    """Switching node to directory: place `meta`, replacing `previous` of the same file if any."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.BIND

    user: str
    meta: FileMeta
    chunk_lengths: list[int] = Field(default_factory=list)
    previous: FileMeta | None = None

    def write_body(self, writer: ByteWriter) -> None:
        writer.text(self.user)
        write_file_meta(writer, self.meta)
        writer.u32(len(self.chunk_lengths))
        for length in self.chunk_lengths:
            writer.u32(length)
        writer.u8(self.previous is not None)
        if self.previous is not None:
            write_file_meta(writer, self.previous)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        user, meta = reader.text(), read_file_meta(reader)
        lengths = [reader.u32() for _ in range(reader.u32())]
        return {"user": user, "meta": meta, "chunk_lengths": lengths, "previous": read_file_meta(reader) if reader.u8() else None}


class BindReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.BIND_REPLY
    IS_REPLY: ClassVar[bool] = True

    meta: FileMeta
    missing: list[ChunkRef] = Field(default_factory=list)

    def write_body(self, writer: ByteWriter) -> None:
        write_file_meta(writer, self.meta)
        _write_refs(writer, self.missing)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"meta": read_file_meta(reader), "missing": _read_refs(reader)}


class Release(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.RELEASE

    meta: FileMeta

    def write_body(self, writer: ByteWriter) -> None:
        write_file_meta(writer, self.meta)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"meta": read_file_meta(reader)}


class ReleaseReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.RELEASE_REPLY
    IS_REPLY: ClassVar[bool] = True

    released: int = Field(0, ge=0, lt=2**32)

    def write_body(self, writer: ByteWriter) -> None:
        writer.u32(self.released)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"released": reader.u32()}


class ChunkStored(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.CHUNK_STORED

    ref: ChunkRef

    def write_body(self, writer: ByteWriter) -> None:
        write_chunk_ref(writer, self.ref)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"ref": read_chunk_ref(reader)}


class Scan(Message):
    """Ask a node for its storage counters; `detail` adds piece keys, refcounts and stored refs."""

    MSG_TYPE: ClassVar[MsgType] = MsgType.SCAN

    detail: bool = False

    def write_body(self, writer: ByteWriter) -> None:
        writer.u8(int(self.detail))

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"detail": bool(reader.u8())}


class ScanReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.SCAN_REPLY
    IS_REPLY: ClassVar[bool] = True

    piece_count: int = Field(0, ge=0)
    piece_bytes: int = Field(0, ge=0)
    header_bytes: int = Field(0, ge=0)
    meta_bytes: int = Field(0, ge=0)
    index_bytes: int = Field(0, ge=0)
    original_bytes: int = Field(0, ge=0)
    file_count: int = Field(0, ge=0)
    charged_bytes: int = Field(0, ge=0)
    pieces: list[PieceKey] = Field(default_factory=list)
    refcounts: list[RefCount] = Field(default_factory=list)
    stored: list[ChunkRef] = Field(default_factory=list)

    def write_body(self, writer: ByteWriter) -> None:
        for value in (
            self.piece_count,
            self.piece_bytes,
            self.header_bytes,
            self.meta_bytes,
            self.index_bytes,
            self.original_bytes,
            self.file_count,
            self.charged_bytes,
        ):
            writer.u64(value)
        writer.u32(len(self.pieces))
        for key in self.pieces:
            writer.raw(key.chunk_id).u8(key.index)
        writer.u32(len(self.refcounts))
        for entry in self.refcounts:
            write_chunk_ref(writer, entry.ref)
            writer.u32(entry.count)
        _write_refs(writer, self.stored)

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        names = ("piece_count", "piece_bytes", "header_bytes", "meta_bytes", "index_bytes", "original_bytes", "file_count", "charged_bytes")
        fields: dict[str, Any] = {name: reader.u64() for name in names}
        fields["pieces"] = [PieceKey(chunk_id=reader.raw(CHUNK_ID_SIZE), index=reader.u8()) for _ in range(reader.u32())]
        fields["refcounts"] = [RefCount(ref=read_chunk_ref(reader), count=reader.u32()) for _ in range(reader.u32())]
        fields["stored"] = _read_refs(reader)
        return fields


class ErrorReply(Message):
    MSG_TYPE: ClassVar[MsgType] = MsgType.ERROR_REPLY
    IS_REPLY: ClassVar[bool] = True

    code: ErrorCode
    detail: str = ""

    def write_body(self, writer: ByteWriter) -> None:
        writer.u16(self.code).text(self.detail[:4096])

    @classmethod
    def read_body(cls, reader: ByteReader) -> dict[str, Any]:
        return {"code": reader.u16(), "detail": reader.text()}

    def to_exception(self) -> ScherbeError:
        """The requesting side's counterpart of the error the node reported."""
        match self.code:
            case ErrorCode.NOT_FOUND:
                return NotFoundError(self.detail)
            case ErrorCode.CAPACITY:
                return CapacityExhaustedError(self.detail)
            case ErrorCode.INTEGRITY:
                return IntegrityError(self.detail)
            case ErrorCode.PARTIAL_STORE:
                return PartialStoreError(self.detail)
            case ErrorCode.NOT_RESPONSIBLE:
                return NotResponsibleError(self.detail)
            case _:
                return RemoteError(self.code, self.detail)


def message_types() -> dict[int, type[Message]]:
    return dict(_REGISTRY)


def encode_message(message: Message) -> bytes:
    """Frame a message.

    Raises:
        FrameTooLargeError: the body exceeds MAX_BODY bytes.

    """
    writer = ByteWriter()
    message.write_body(writer)
    body = writer.getvalue()
    if len(body) > MAX_BODY:
        raise FrameTooLargeError(f"{type(message).__name__} body of {len(body)} bytes exceeds {MAX_BODY}")
    return HEADER.pack(HEADER_SIZE + len(body), message.MSG_TYPE, message.request_id) + body


def frame_length(buffer: bytes | bytearray | memoryview) -> int:
    """Total length of the frame at the start of `buffer`.

    Raises:
        IncompleteFrameError: not even the header is complete.
        MalformedFrameError: the length field is shorter than the header.

    """
    if len(buffer) < HEADER_SIZE:
        raise IncompleteFrameError(HEADER_SIZE - len(buffer))
    total = int.from_bytes(buffer[:4], "big")
    if total < HEADER_SIZE:
        raise MalformedFrameError(f"frame length {total} below header size {HEADER_SIZE}")
    return total


def decode_frame(buffer: bytes | bytearray | memoryview) -> tuple[Message, int]:
    """Decode the first frame of `buffer`, return it with the number of bytes it spans.

    Raises:
        IncompleteFrameError: more bytes are needed, nothing is consumed.
        UnknownMessageTypeError: msg_type outside the catalogue.
        MalformedFrameError: bad length field, short body or invalid field values.

    """
    total = frame_length(buffer)
    if len(buffer) < total:
        raise IncompleteFrameError(total - len(buffer))
    _, code, request_id = HEADER.unpack_from(buffer)
    cls = _REGISTRY.get(code)
    if cls is None:
        raise UnknownMessageTypeError(code, request_id)
    reader = ByteReader(memoryview(buffer)[HEADER_SIZE:total])
    try:
        fields = cls.read_body(reader)
        reader.expect_end()
        return cls(request_id=request_id, **fields), total
    except ValidationError as err:
        raise MalformedFrameError(f"invalid {cls.__name__} body: {err}") from err


def decode_message(buffer: bytes | bytearray | memoryview) -> Message:
    """Decode the first frame of `buffer`; bytes beyond it are left alone."""
    return decode_frame(buffer)[0]
