# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""In-process network simulator on a virtual clock.

`VirtualClockEventLoop` is an ordinary asyncio selector loop whose clock jumps to the next
scheduled timer whenever nothing is ready, so nodes and clients run their regular
coroutines while latency costs no wall time. `SimNetwork` moves encoded frames between
registered endpoints and delivers each one after a delay drawn from a seeded LatencyModel.

```python
import asyncio

from scherbe.wire.sim import run_simulation


async def main():
    await asyncio.sleep(3600)
    return asyncio.get_running_loop().time()


print(run_simulation(main()))
#> 3600.0
```
"""

import asyncio
import logging
import selectors
from collections import defaultdict, deque
from collections.abc import Coroutine
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from scherbe.exceptions import RoutingError, SimulationStalledError, TransportError, WireError

from .messages import Cancel, ErrorCode, ErrorReply, Message, decode_message, encode_message
from .transport import Handler, Transport

log = logging.getLogger(__name__)

T = TypeVar("T")


class _VirtualSelector(selectors.DefaultSelector):
    """Polls real file descriptors without blocking and advances virtual time instead of sleeping."""

    def __init__(self) -> None:
        super().__init__()
        self.now = 0.0

    def select(self, timeout: float | None = None) -> list[tuple[selectors.SelectorKey, int]]:
        events = super().select(0)
        if events:
            return events
        if timeout is None:
            raise SimulationStalledError("no timer is scheduled and nothing is ready, the simulation would wait forever")
        self.now += max(timeout, 0.0)
        return []


class VirtualClockEventLoop(asyncio.SelectorEventLoop):
    def __init__(self) -> None:
        self._virtual = _VirtualSelector()
        super().__init__(selector=self._virtual)
        self._clock_resolution = 1e-7

    def time(self) -> float:
        return self._virtual.now


def run_simulation(coro: Coroutine[Any, Any, T], *, debug: bool | None = None) -> T:
    """Run `coro` to completion on a fresh virtual-clock loop starting at t=0."""
    with asyncio.Runner(debug=debug, loop_factory=VirtualClockEventLoop) as runner:
        return runner.run(coro)


class LatencyModel(BaseModel):
    """One-way delay of a frame: base + per_byte x size + N(0, jitter), never negative.

    With `contention` every sender owns one uplink: frames leave it one after another, each
    occupying it for per_byte x size, so a node asked for many pieces at once answers them in turn.
    """

    model_config = ConfigDict(frozen=True)

    base_ms: float = Field(5.0, ge=0)
    per_byte_ms: float = Field(0.002, ge=0)
    jitter_ms: float = Field(1.0, ge=0)
    seed: int = Field(0, ge=0)
    contention: bool = True


class SimEndpoint(Transport):
    """A registered address; serves requests through its handler and issues its own."""

    def __init__(self, network: "SimNetwork", address: str, handler: Handler | None = None) -> None:
        super().__init__(address)
        self._network = network
        self.handler = handler
        self._pending: dict[int, asyncio.Future[Message]] = {}
        self._serving: dict[tuple[str, int], asyncio.Task[None]] = {}
        self.late_replies = 0

    async def _exchange(self, dst: str, message: Message) -> Message:
        future: asyncio.Future[Message] = asyncio.get_running_loop().create_future()
        self._pending[message.request_id] = future
        try:
            self._network.send(self.address, dst, message)
            return await future
        except asyncio.CancelledError:
            self._cancel_remote(dst, message.request_id)
            raise
        finally:
            self._pending.pop(message.request_id, None)

    def _cancel_remote(self, dst: str, target: int) -> None:
        try:
            self._network.send(self.address, dst, Cancel(request_id=next(self._request_ids), target=target))
        except TransportError:
            pass

    def fail(self, request_id: int, error: BaseException) -> None:
        future = self._pending.get(request_id)
        if future is not None and not future.done():
            future.set_exception(error)

    def receive(self, src: str, message: Message) -> None:
        if message.IS_REPLY:
            future = self._pending.get(message.request_id)
            if future is None or future.done():
                self.late_replies += 1
                return
            future.set_result(message)
        elif isinstance(message, Cancel):
            task = self._serving.get((src, message.target))
            if task is not None:
                task.cancel()
        else:
            key = (src, message.request_id)
            task = asyncio.get_running_loop().create_task(self._serve(src, message))
            self._serving[key] = task
            task.add_done_callback(lambda _: self._serving.pop(key, None))

    async def _serve(self, src: str, message: Message) -> None:
        if self.handler is None:
            reply: Message | None = ErrorReply(code=ErrorCode.NOT_RESPONSIBLE, detail=f"{self.address} serves no requests")
        else:
            try:
                reply = await self.handler(src, message)
            except asyncio.CancelledError:
                log.debug("Request cancelled", extra={"node": self.address, "src": src, "request": message.request_id})
                raise
            except Exception as err:  # pylint: disable=broad-exception-caught
                log.exception("Handler failed", extra={"node": self.address, "msg_type": type(message).__name__})
                reply = ErrorReply(code=ErrorCode.INTERNAL, detail=str(err))
        if reply is None:
            return
        try:
            self._network.send(self.address, src, reply.model_copy(update={"request_id": message.request_id}))
        except TransportError as err:
            log.debug("Reply dropped", extra={"node": self.address, "dst": src, "error": str(err)})


class SimNetwork:
    """Registry of endpoints plus the delay model between them.

    Frames of one (src, dst) pair are delivered in send order.
    """

    def __init__(self, model: LatencyModel | None = None) -> None:
        self.model = model or LatencyModel()
        self._rng = np.random.default_rng(self.model.seed)
        self._endpoints: dict[str, SimEndpoint] = {}
        self._overrides: dict[str, LatencyModel] = {}
        self._down: set[str] = set()
        self._busy_until: dict[str, float] = {}
        self._last_delivery: dict[tuple[str, str], float] = {}
        self._in_flight: dict[tuple[str, str], deque[bytes]] = defaultdict(deque)
        self.bytes_on_wire = 0
        self.frames_sent = 0

    def register(self, address: str, handler: Handler | None = None) -> SimEndpoint:
        if address in self._endpoints:
            raise RoutingError(f"endpoint {address} is already registered")
        endpoint = SimEndpoint(self, address, handler)
        self._endpoints[address] = endpoint
        return endpoint

    def unregister(self, address: str) -> None:
        self._endpoints.pop(address, None)

    def endpoint(self, address: str) -> SimEndpoint:
        try:
            return self._endpoints[address]
        except KeyError as err:
            raise RoutingError(f"unknown endpoint {address}") from err

    def endpoints(self) -> list[str]:
        return sorted(self._endpoints)

    def set_latency(self, address: str, model: LatencyModel | None) -> None:
        """Delay model of frames sent by `address`; None restores the network default."""
        if model is None:
            self._overrides.pop(address, None)
        else:
            self._overrides[address] = model

    def set_down(self, address: str, down: bool = True) -> None:
        self.endpoint(address)
        if down:
            self._down.add(address)
        else:
            self._down.discard(address)

    def _jitter(self, model: LatencyModel) -> float:
        return float(self._rng.normal(0.0, model.jitter_ms)) if model.jitter_ms > 0 else 0.0

    def send(self, src: str, dst: str, message: Message) -> float:
        """Schedule delivery of `message` and return the virtual delivery time.

        Raises:
            RoutingError: `dst` was never registered.
            TransportError: either side is down.

        """
        if dst not in self._endpoints:
            raise RoutingError(f"unknown endpoint {dst}")
        if dst in self._down or src in self._down:
            raise TransportError(f"{dst if dst in self._down else src} is down")
        data = encode_message(message)
        loop = asyncio.get_running_loop()
        now = loop.time()
        model = self._overrides.get(src, self.model)
        size = len(data)
        if model.contention:
            start = max(now, self._busy_until.get(src, now))
            self._busy_until[src] = start + model.per_byte_ms * size / 1000
            when = self._busy_until[src] + max(0.0, model.base_ms + self._jitter(model)) / 1000
        else:
            when = now + max(0.0, model.base_ms + model.per_byte_ms * size + self._jitter(model)) / 1000
        pair = (src, dst)
        when = max(when, self._last_delivery.get(pair, now))
        self._last_delivery[pair] = when
        self._in_flight[pair].append(data)
        loop.call_at(when, self._deliver, src, dst)
        self.bytes_on_wire += size
        self.frames_sent += 1
        if src in self._endpoints:
            self._endpoints[src].bytes_sent += size
        return when

    def _deliver(self, src: str, dst: str) -> None:
        data = self._in_flight[(src, dst)].popleft()
        try:
            message = decode_message(data)
        except WireError:
            log.exception("Undecodable frame in flight", extra={"src": src, "dst": dst, "size": len(data)})
            return
        endpoint = self._endpoints.get(dst)
        if endpoint is None or dst in self._down:
            if not message.IS_REPLY and not isinstance(message, Cancel) and src in self._endpoints:
                self._endpoints[src].fail(message.request_id, TransportError(f"{dst} went down"))
            return
        endpoint.bytes_received += len(data)
        endpoint.receive(src, message)
