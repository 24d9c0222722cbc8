# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

import struct

import numpy as np
import pytest

from scherbe.erasure import CodedPiece, CodingParams, encode_chunk

from scherbe.exceptions import (
    CapacityExhaustedError,
    IncompleteFrameError,
    IntegrityError,
    MalformedFrameError,
    NotFoundError,
    NotResponsibleError,
    PartialStoreError,
    RemoteError,
    UnknownMessageTypeError,
)
from scherbe.metadata import ChunkRef, FileMeta
from scherbe.wire import (
    HEADER_SIZE,
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
    MetaReply,
    MissingList,
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

CID = bytes(range(20))
REF = ChunkRef(chunk_id=CID, cluster_id=3)
META = FileMeta(file_name="notes.txt", user_id="alice", timestamp=1_700_000_000_000, chunks=(REF, REF), total_len=2048)
PIECE = encode_chunk(b"x" * 1000, CodingParams(n=4, k=2))[3]

SAMPLES = [
    StoreMeta(request_id=1, user="alice", meta=META, chunk_lengths=[1024, 1024]),
    MissingList(request_id=2, accepted=False, missing=[REF], placements=[3, 3]),
    GetMeta(request_id=3, user="alice", file_name="notes.txt"),
    MetaReply(request_id=4, meta=META),
    MetaReply(request_id=4, meta=None),
    StoreChunk(request_id=5, chunk_id=CID, cluster_id=3, payload=b"payload"),
    StoreAck(request_id=6, chunk_id=CID, kept=False),
    StorePiece(request_id=7, piece=PIECE),
    PieceAck(request_id=8, chunk_id=CID, index=9, created=False),
    GetPiece(request_id=9, chunk_id=CID, index=2),
    PieceReply(request_id=10, piece=PIECE),
    PieceReply(request_id=10),
    DeleteFile(request_id=11, user="alice", file_name="notes.txt"),
    DeleteAck(request_id=12, existed=False),
    DeletePiece(request_id=13, chunk_id=CID, index=1),
    Cancel(request_id=14, target=2**64 - 1),
    ListFiles(request_id=15, user="bob"),
    FileList(request_id=16, files=[FileEntry(file_name="a", timestamp=1), FileEntry(file_name="ü", timestamp=2)]),
    Bind(request_id=17, user="alice", meta=META, chunk_lengths=[1024, 1024], previous=META),
    Bind(request_id=17, user="alice", meta=META),
    BindReply(request_id=18, meta=META, missing=[REF]),
    Release(request_id=19, meta=META),
    ReleaseReply(request_id=20, released=4),
    ChunkStored(request_id=21, ref=REF),
    Scan(request_id=22, detail=True),
    ScanReply(
        request_id=23,
        piece_count=2,
        piece_bytes=1000,
        header_bytes=20,
        meta_bytes=90,
        index_bytes=23,
        original_bytes=1000,
        file_count=1,
        charged_bytes=2000,
        pieces=[PieceKey(chunk_id=CID, index=0), PieceKey(chunk_id=CID, index=1)],
        refcounts=[RefCount(ref=REF, count=2)],
        stored=[REF],
    ),
    ErrorReply(request_id=24, code=ErrorCode.NOT_FOUND, detail="no such file"),
]


def test_samples_cover_catalogue():
    assert {type(sample) for sample in SAMPLES} == set(message_types().values())


@pytest.mark.parametrize("message", [pytest.param(sample, id=f"{type(sample).__name__}-{i}") for i, sample in enumerate(SAMPLES)])
def test_roundtrip(message):
    frame = encode_message(message)
    decoded, total = decode_frame(frame)
    assert total == len(frame)
    assert decoded == message
    assert type(decoded) is type(message)


def test_header_layout():
    frame = encode_message(GetPiece(request_id=7, chunk_id=CID, index=3))
    assert len(frame) == 34
    assert struct.unpack(">IBQ", frame[:HEADER_SIZE]) == (34, 0x09, 7)
    assert frame[HEADER_SIZE:] == CID + b"\x03"


def test_leftover_bytes_are_untouched():
    first = encode_message(GetPiece(request_id=1, chunk_id=CID, index=0))
    second = encode_message(Scan(request_id=2))
    buffer = first + second[:5]
    message, total = decode_frame(buffer)
    assert message.request_id == 1
    assert buffer[total:] == second[:5]
    with pytest.raises(IncompleteFrameError) as err:
        decode_frame(buffer[total:])
    assert err.value.needed == HEADER_SIZE - 5


def test_incomplete_header():
    with pytest.raises(IncompleteFrameError) as err:
        decode_frame(b"\x00\x00\x00")
    assert err.value.needed == HEADER_SIZE - 3


def test_incomplete_body():
    frame = encode_message(GetPiece(request_id=1, chunk_id=CID, index=0))
    with pytest.raises(IncompleteFrameError) as err:
        decode_frame(frame[:-4])
    assert err.value.needed == 4
    assert frame_length(frame[:-4]) == 34


def test_unknown_message_type():
    frame = struct.pack(">IBQ", HEADER_SIZE, 0xFF, 42)
    with pytest.raises(UnknownMessageTypeError) as err:
        decode_frame(frame)
    assert err.value.code == 0xFF
    assert err.value.request_id == 42


@pytest.mark.parametrize(
    "frame",
    [
        pytest.param(struct.pack(">IBQ", 5, 0x09, 1) + CID + b"\x00", id="length-below-header"),
        pytest.param(struct.pack(">IBQ", HEADER_SIZE + 3, 0x09, 1) + b"abc", id="short-body"),
        pytest.param(struct.pack(">IBQ", HEADER_SIZE + 4, 0x7F, 1) + b"\x00\x63\x00\x00", id="unknown-error-code"),
        pytest.param(struct.pack(">IBQ", HEADER_SIZE + 2, 0x17, 1) + b"\x01\x00", id="trailing-body-bytes"),
    ],
)
def test_malformed(frame):
    with pytest.raises(MalformedFrameError):
        decode_message(frame)


@pytest.mark.parametrize(
    "code,expected",
    [
        pytest.param(ErrorCode.NOT_FOUND, NotFoundError, id="not-found"),
        pytest.param(ErrorCode.CAPACITY, CapacityExhaustedError, id="capacity"),
        pytest.param(ErrorCode.INTEGRITY, IntegrityError, id="integrity"),
        pytest.param(ErrorCode.PARTIAL_STORE, PartialStoreError, id="partial-store"),
        pytest.param(ErrorCode.NOT_RESPONSIBLE, NotResponsibleError, id="not-responsible"),
        pytest.param(ErrorCode.PROTOCOL, RemoteError, id="protocol"),
        pytest.param(ErrorCode.INTERNAL, RemoteError, id="internal"),
    ],
)
def test_error_reply_to_exception(code, expected):
    assert isinstance(ErrorReply(code=code, detail="boom").to_exception(), expected)


class RandomMessages:
    """Seeded builder of valid messages with random field values."""

    ALPHABET = list("abcxyz019 ._-/") + ["ä", "é", "ß", "€", "日", "本", "🙂"]

    def __init__(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    def number(self, low: int, high: int) -> int:
        return int(self.rng.integers(low, high, endpoint=True, dtype=np.uint64)) if high > 2**62 else int(self.rng.integers(low, high + 1))

    def flag(self) -> bool:
        return bool(self.rng.integers(2))

    def text(self, min_length: int = 0) -> str:
        return "".join(self.rng.choice(self.ALPHABET, self.number(min_length, 24)))

    def blob(self, max_length: int = 64) -> bytes:
        return self.rng.bytes(self.number(0, max_length))

    def chunk_id(self) -> bytes:
        return self.rng.bytes(20)

    def ref(self) -> ChunkRef:
        return ChunkRef(chunk_id=self.chunk_id(), cluster_id=self.number(0, 0xFFFF))

    def refs(self) -> list[ChunkRef]:
        return [self.ref() for _ in range(self.number(0, 5))]

    def meta(self) -> FileMeta:
        return FileMeta(
            file_name=self.text(1),
            user_id=self.text(1),
            timestamp=self.number(0, 2**64 - 1),
            chunks=tuple(self.refs()),
            total_len=self.number(0, 2**64 - 1),
        )

    def piece(self) -> CodedPiece:
        n = self.number(1, 255)
        params = CodingParams(n=n, k=self.number(1, n))
        original_len = self.number(1, 600)
        return CodedPiece(
            chunk_id=self.chunk_id(),
            index=self.number(0, n - 1),
            params=params,
            original_len=original_len,
            payload=self.rng.bytes(params.piece_len(original_len)),
        )

    def u32s(self) -> list[int]:
        return [self.number(0, 2**32 - 1) for _ in range(self.number(0, 5))]

    def build(self, cls: type) -> object:
        request_id = self.number(0, 2**64 - 1)
        builders = {
            StoreMeta: lambda: {"user": self.text(), "meta": self.meta(), "chunk_lengths": self.u32s()},
            MissingList: lambda: {
                "accepted": self.flag(),
                "missing": self.refs(),
                "placements": [self.number(0, 0xFFFF) for _ in range(self.number(0, 5))],
            },
            GetMeta: lambda: {"user": self.text(), "file_name": self.text()},
            MetaReply: lambda: {"meta": self.meta() if self.flag() else None},
            StoreChunk: lambda: {"chunk_id": self.chunk_id(), "cluster_id": self.number(0, 0xFFFF), "payload": self.blob()},
            StoreAck: lambda: {"chunk_id": self.chunk_id(), "kept": self.flag()},
            StorePiece: lambda: {"piece": self.piece()},
            PieceAck: lambda: {"chunk_id": self.chunk_id(), "index": self.number(0, 255), "created": self.flag()},
            GetPiece: lambda: {"chunk_id": self.chunk_id(), "index": self.number(0, 255)},
            PieceReply: lambda: {"piece": self.piece() if self.flag() else None},
            DeleteFile: lambda: {"user": self.text(), "file_name": self.text()},
            DeleteAck: lambda: {"existed": self.flag()},
            DeletePiece: lambda: {"chunk_id": self.chunk_id(), "index": self.number(0, 255)},
            Cancel: lambda: {"target": self.number(0, 2**64 - 1)},
            ListFiles: lambda: {"user": self.text()},
            FileList: lambda: {
                "files": [FileEntry(file_name=self.text(), timestamp=self.number(0, 2**64 - 1)) for _ in range(self.number(0, 5))],
            },
            Bind: lambda: {
                "user": self.text(),
                "meta": self.meta(),
                "chunk_lengths": self.u32s(),
                "previous": self.meta() if self.flag() else None,
            },
            BindReply: lambda: {"meta": self.meta(), "missing": self.refs()},
            Release: lambda: {"meta": self.meta()},
            ReleaseReply: lambda: {"released": self.number(0, 2**32 - 1)},
            ChunkStored: lambda: {"ref": self.ref()},
            Scan: lambda: {"detail": self.flag()},
            ScanReply: lambda: {
                **{
                    name: self.number(0, 2**64 - 1)
                    for name in (
                        "piece_count",
                        "piece_bytes",
                        "header_bytes",
                        "meta_bytes",
                        "index_bytes",
                        "original_bytes",
                        "file_count",
                        "charged_bytes",
                    )
                },
                "pieces": [PieceKey(chunk_id=self.chunk_id(), index=self.number(0, 255)) for _ in range(self.number(0, 5))],
                "refcounts": [RefCount(ref=self.ref(), count=self.number(1, 2**32 - 1)) for _ in range(self.number(0, 5))],
                "stored": self.refs(),
            },
            ErrorReply: lambda: {"code": list(ErrorCode)[self.number(0, len(ErrorCode) - 1)], "detail": self.text()},
        }
        return cls(request_id=request_id, **builders[cls]())


@pytest.mark.parametrize(
    "rounds",
    [
        pytest.param(200, id="quick"),
        pytest.param(10_000, id="full", marks=pytest.mark.slow),
    ],
)
@pytest.mark.parametrize("cls", [pytest.param(cls, id=cls.__name__) for cls in message_types().values()])
def test_random_roundtrip(cls, rounds):
    messages = RandomMessages(seed=int(cls.MSG_TYPE))
    for _ in range(rounds):
        message = messages.build(cls)
        frame = encode_message(message)
        decoded, total = decode_frame(frame)
        assert total == len(frame)
        assert decoded == message


@pytest.mark.parametrize("cls", [pytest.param(cls, id=cls.__name__) for cls in message_types().values()])
def test_every_truncation_is_rejected(cls):
    messages = RandomMessages(seed=1000 + int(cls.MSG_TYPE))
    for _ in range(5):
        frame = encode_message(messages.build(cls))
        for cut in range(1, len(frame) - HEADER_SIZE + 1):
            body = frame[HEADER_SIZE:-cut]
            header = struct.pack(">IBQ", HEADER_SIZE + len(body), cls.MSG_TYPE, 1)
            with pytest.raises(MalformedFrameError):
                decode_message(header + body)
