# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""TCP transport: one request in flight per connection, idle connections pooled per destination.

A client opens a connection by sending the protocol version byte, then alternates
request and reply frames. Cancelling a request aborts its connection.
"""

import asyncio
import contextlib
import logging
from collections import defaultdict

from scherbe.exceptions import FrameTooLargeError, MalformedFrameError, TransportError, UnknownMessageTypeError, WireError

from .messages import HEADER, HEADER_SIZE, PROTOCOL_VERSION, ErrorCode, ErrorReply, Message, decode_message, encode_message, frame_length
from .transport import Handler, Transport

log = logging.getLogger(__name__)

DEFAULT_MAX_FRAME = 64 * 1024 * 1024


def parse_address(address: str) -> tuple[str, int]:
    """Split `host:port`; IPv6 hosts come in brackets.

    Raises:
        TransportError: no port or a port outside 1..65535.

    """
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit() or not 0 < int(port) < 65536:
        raise TransportError(f"invalid address {address!r}, expected host:port")
    return host.strip("[]") or "127.0.0.1", int(port)


async def read_frame(reader: asyncio.StreamReader, max_frame: int = DEFAULT_MAX_FRAME) -> bytes:
    """Read one complete frame.

    Raises:
        asyncio.IncompleteReadError: the peer closed the connection.
        FrameTooLargeError: the announced length exceeds `max_frame`.
        MalformedFrameError: the announced length is below the header size.

    """
    header = await reader.readexactly(HEADER_SIZE)
    total = frame_length(header)
    if total > max_frame:
        raise FrameTooLargeError(f"frame of {total} bytes exceeds {max_frame}")
    return header + await reader.readexactly(total - HEADER_SIZE)


class _Connection:
    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self.reader = reader
        self.writer = writer

    def abort(self) -> None:
        self.writer.transport.abort()

    async def close(self) -> None:
        self.writer.close()
        with contextlib.suppress(OSError):
            await self.writer.wait_closed()


class SocketTransport(Transport):
    def __init__(self, address: str = "client", max_frame: int = DEFAULT_MAX_FRAME, pool_size: int = 16) -> None:
        super().__init__(address)
        self.max_frame = max_frame
        self.pool_size = pool_size
        self._idle: dict[str, list[_Connection]] = defaultdict(list)

    async def _connect(self, dst: str, reuse: bool = True) -> _Connection:
        if reuse and self._idle[dst]:
            return self._idle[dst].pop()
        host, port = parse_address(dst)
        try:
            reader, writer = await asyncio.open_connection(host, port)
        except OSError as err:
            raise TransportError(f"can not connect to {dst}: {err}") from err
        writer.write(bytes([PROTOCOL_VERSION]))
        return _Connection(reader, writer)

    async def _exchange(self, dst: str, message: Message) -> Message:
        frame = encode_message(message)
        pooled = bool(self._idle[dst])
        connection = await self._connect(dst)
        while True:
            try:
                connection.writer.write(frame)
                await connection.writer.drain()
                self.bytes_sent += len(frame)
                data = await read_frame(connection.reader, self.max_frame)
                break
            except asyncio.CancelledError:
                connection.abort()
                raise
            except (OSError, asyncio.IncompleteReadError, WireError) as err:
                connection.abort()
                if pooled and isinstance(err, (OSError, asyncio.IncompleteReadError)):
                    # the peer may have closed an idle connection
                    pooled = False
                    connection = await self._connect(dst, reuse=False)
                    continue
                raise TransportError(f"{type(message).__name__} to {dst} failed: {err}") from err
        self.bytes_received += len(data)
        reply = decode_message(data)
        if reply.request_id != message.request_id:
            connection.abort()
            raise MalformedFrameError(f"{dst} answered request {message.request_id} with {reply.request_id}")
        if len(self._idle[dst]) < self.pool_size:
            self._idle[dst].append(connection)
        else:
            await connection.close()
        return reply

    async def close(self) -> None:
        for connections in self._idle.values():
            for connection in connections:
                await connection.close()
        self._idle.clear()


class SocketServer:
    """Accepts connections and serves their frames one after another through `handler`."""

    def __init__(self, address: str, handler: Handler, max_frame: int = DEFAULT_MAX_FRAME) -> None:
        self.address = address
        self.handler = handler
        self.max_frame = max_frame
        self._server: asyncio.Server | None = None

    async def start(self) -> None:
        host, port = parse_address(self.address)
        try:
            self._server = await asyncio.start_server(self._serve, host, port)
        except OSError as err:
            raise TransportError(f"node {self.address} can not listen: {err}") from err
        log.info("Listening", extra={"address": self.address})

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:  # type: ignore[union-attr]
            await self._server.serve_forever()  # type: ignore[union-attr]

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def _reply(self, writer: asyncio.StreamWriter, reply: Message) -> None:
        writer.write(encode_message(reply))
        await writer.drain()

    async def _serve(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = "{}:{}".format(*writer.get_extra_info("peername")[:2])
        try:
            version = (await reader.readexactly(1))[0]
            if version != PROTOCOL_VERSION:
                log.warning("Unsupported protocol version", extra={"peer": peer, "version": version})
                return
            while True:
                try:
                    data = await read_frame(reader, self.max_frame)
                except (FrameTooLargeError, MalformedFrameError) as err:
                    await self._reply(writer, ErrorReply(code=ErrorCode.PROTOCOL, detail=str(err)))
                    return
                try:
                    message = decode_message(data)
                except UnknownMessageTypeError as err:
                    await self._reply(writer, ErrorReply(request_id=err.request_id, code=ErrorCode.PROTOCOL, detail=str(err)))
                    continue
                except WireError as err:
                    _, _, request_id = HEADER.unpack_from(data)
                    await self._reply(writer, ErrorReply(request_id=request_id, code=ErrorCode.PROTOCOL, detail=str(err)))
                    continue
                try:
                    reply = await self.handler(peer, message)
                except Exception as err:  # pylint: disable=broad-exception-caught
                    log.exception("Handler failed", extra={"node": self.address, "msg_type": type(message).__name__})
                    reply = ErrorReply(code=ErrorCode.INTERNAL, detail=str(err))
                if reply is not None:
                    await self._reply(writer, reply.model_copy(update={"request_id": message.request_id}))
        except (asyncio.IncompleteReadError, ConnectionError):
            pass
        finally:
            writer.close()
            with contextlib.suppress(OSError):
                await writer.wait_closed()
