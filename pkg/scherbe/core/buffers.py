# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Big-endian field writer and reader shared by the on-disk and on-wire layouts."""

import struct

from scherbe.exceptions import MalformedFrameError

_U8 = struct.Struct(">B")
_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")


class ByteWriter:
    def __init__(self) -> None:
        self._buffer = bytearray()

    def u8(self, value: int) -> "ByteWriter":
        self._buffer += _U8.pack(value)
        return self

    def u16(self, value: int) -> "ByteWriter":
        self._buffer += _U16.pack(value)
        return self

    def u32(self, value: int) -> "ByteWriter":
        self._buffer += _U32.pack(value)
        return self

    def u64(self, value: int) -> "ByteWriter":
        self._buffer += _U64.pack(value)
        return self

    def raw(self, value: bytes) -> "ByteWriter":
        self._buffer += value
        return self

    def text(self, value: str) -> "ByteWriter":
        """u16 length prefixed utf-8."""
        encoded = value.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise MalformedFrameError(f"text field of {len(encoded)} bytes exceeds 65535")
        return self.u16(len(encoded)).raw(encoded)

    def blob(self, value: bytes) -> "ByteWriter":
        """u32 length prefixed bytes."""
        return self.u32(len(value)).raw(value)

    def getvalue(self) -> bytes:
        return bytes(self._buffer)

    def __len__(self) -> int:
        return len(self._buffer)


class ByteReader:
    """Reads fields from a buffer, every short read raises MalformedFrameError."""

    def __init__(self, data: bytes | bytearray | memoryview, offset: int = 0) -> None:
        self._view = memoryview(data)
        self.offset = offset

    def _take(self, size: int) -> memoryview:
        end = self.offset + size
        if end > len(self._view):
            raise MalformedFrameError(f"short body: needed {size} bytes at offset {self.offset}, {len(self._view) - self.offset} left")
        chunk = self._view[self.offset : end]
        self.offset = end
        return chunk

    def u8(self) -> int:
        return _U8.unpack(self._take(1))[0]

    def u16(self) -> int:
        return _U16.unpack(self._take(2))[0]

    def u32(self) -> int:
        return _U32.unpack(self._take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self._take(8))[0]

    def raw(self, size: int) -> bytes:
        return bytes(self._take(size))

    def text(self) -> str:
        size = self.u16()
        try:
            return bytes(self._take(size)).decode("utf-8")
        except UnicodeDecodeError as err:
            raise MalformedFrameError(f"text field is not utf-8: {err}") from err

    def blob(self) -> bytes:
        return self.raw(self.u32())

    @property
    def remaining(self) -> int:
        return len(self._view) - self.offset

    def expect_end(self) -> None:
        if self.remaining:
            raise MalformedFrameError(f"{self.remaining} trailing bytes in body")
