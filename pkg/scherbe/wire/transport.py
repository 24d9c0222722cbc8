# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""Request/response contract shared by the socket transport and the simulator."""

import asyncio
import itertools
import logging
from abc import ABC, abstractmethod
from collections.abc import Awaitable, Callable
from typing import TypeVar

from scherbe.exceptions import MalformedFrameError, TransportError

from .messages import ErrorReply, Message

log = logging.getLogger(__name__)

Handler = Callable[[str, Message], Awaitable[Message | None]]
"""serves one request from the given source address, None means no reply."""

ReplyT = TypeVar("ReplyT", bound=Message)


class Transport(ABC):
    """Client side of a node or end device.

    The transport stamps a fresh request id on every request. Cancelling the awaiting task
    aborts the exchange: a socket connection is dropped, the simulator sends a Cancel.
    """

    def __init__(self, address: str) -> None:
        self.address = address
        self._request_ids = itertools.count(1)
        self.bytes_sent = 0
        self.bytes_received = 0

    @abstractmethod
    async def _exchange(self, dst: str, message: Message) -> Message:
        """Send one stamped request and wait for its reply."""

    async def request(self, dst: str, message: Message, timeout: float | None = None) -> Message:
        """Send `message` to `dst` and return whatever it replies, ErrorReply included.

        Raises:
            TransportError: `dst` is unreachable, the connection broke or the timeout expired.

        """
        stamped = message.model_copy(update={"request_id": next(self._request_ids)})
        try:
            async with asyncio.timeout(timeout):
                return await self._exchange(dst, stamped)
        except TimeoutError as err:
            raise TransportError(f"{type(message).__name__} to {dst} timed out after {timeout}s") from err

    async def call(self, dst: str, message: Message, expected: type[ReplyT], timeout: float | None = None) -> ReplyT:
        """Like request, but an ErrorReply is raised as its exception and the reply type is checked.

        Raises:
            ScherbeError: the counterpart of an ErrorReply.
            MalformedFrameError: the reply is of another type.

        """
        reply = await self.request(dst, message, timeout)
        if isinstance(reply, ErrorReply):
            raise reply.to_exception()
        if not isinstance(reply, expected):
            raise MalformedFrameError(f"{dst} answered {type(message).__name__} with {type(reply).__name__}")
        return reply

    async def close(self) -> None:
        """Release pooled connections."""
