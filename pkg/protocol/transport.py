"""
Transports - move opaque message frames between the two parties.

``InProcessTransport`` pairs run both parties inside one process;
``TcpTransport`` frames each message with a u32 big-endian length. Neither
encrypts: a secure channel is attached by subclassing ``TransportWrapper``.
"""

import logging
import queue
import socket
import struct
import time
from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

from .errors import LengthOverflowError, TransportError

log = logging.getLogger(__name__)

LENGTH_PREFIX = struct.Struct(">I")
MAX_MESSAGE_BYTES = 0xFFFFFFFF
RECV_CHUNK = 1 << 16


class Transport(ABC):
    """A connected, ordered, reliable channel to the peer"""

    @abstractmethod
    def send(self, payload: bytes) -> None:
        pass

    @abstractmethod
    def receive(self) -> bytes:
        pass

    @abstractmethod
    def close(self) -> None:
        pass

    def __enter__(self) -> "Transport":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


_CLOSED = object()


class InProcessTransport(Transport):
    """One end of an in-memory channel; create both ends with ``pair()``"""

    def __init__(self, inbox: "queue.Queue", outbox: "queue.Queue", timeout: Optional[float] = None):
        self._inbox = inbox
        self._outbox = outbox
        self._timeout = timeout
        self._closed = False

    @classmethod
    def pair(cls, timeout: Optional[float] = None) -> Tuple["InProcessTransport", "InProcessTransport"]:
        a_to_b: "queue.Queue" = queue.Queue()
        b_to_a: "queue.Queue" = queue.Queue()
        return cls(b_to_a, a_to_b, timeout), cls(a_to_b, b_to_a, timeout)

    def send(self, payload: bytes) -> None:
        if self._closed:
            raise TransportError("Send on a closed in-process transport")
        self._outbox.put(bytes(payload))

    def receive(self) -> bytes:
        if self._closed:
            raise TransportError("Receive on a closed in-process transport")
        try:
            item = self._inbox.get(timeout=self._timeout)
        except queue.Empty:
            raise TransportError(f"No message from peer within {self._timeout} s") from None
        if item is _CLOSED:
            self._inbox.put(_CLOSED)
            raise TransportError("Peer closed the in-process transport")
        return item

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._outbox.put(_CLOSED)


class TcpTransport(Transport):
    """Length-prefixed frames over a connected stream socket"""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send(self, payload: bytes) -> None:
        if len(payload) > MAX_MESSAGE_BYTES:
            raise LengthOverflowError(len(payload), MAX_MESSAGE_BYTES, "message")
        try:
            self._sock.sendall(LENGTH_PREFIX.pack(len(payload)) + payload)
        except OSError as exc:
            raise TransportError(f"Send failed: {exc}") from exc

    def receive(self) -> bytes:
        (length,) = LENGTH_PREFIX.unpack(self._receive_exactly(LENGTH_PREFIX.size))
        return self._receive_exactly(length)

    def _receive_exactly(self, size: int) -> bytes:
        buffer = bytearray(size)
        view = memoryview(buffer)
        received = 0
        while received < size:
            try:
                count = self._sock.recv_into(view[received:], min(RECV_CHUNK, size - received))
            except OSError as exc:
                raise TransportError(f"Receive failed: {exc}") from exc
            if not count:
                raise TransportError(f"Connection closed after {received} of {size} bytes")
            received += count
        return bytes(buffer)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class TcpListener:
    """Bound listening socket; ``port=0`` picks a free port"""

    def __init__(self, host: str = "127.0.0.1", port: int = 0, timeout: Optional[float] = None):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.settimeout(timeout)
        try:
            self._sock.bind((host, port))
            self._sock.listen(1)
        except OSError as exc:
            self._sock.close()
            raise TransportError(f"Cannot listen on {host}:{port}: {exc}") from exc

    @property
    def address(self) -> Tuple[str, int]:
        return self._sock.getsockname()[:2]

    @property
    def port(self) -> int:
        return self.address[1]

    def accept(self) -> TcpTransport:
        try:
            client, peer = self._sock.accept()
        except OSError as exc:
            raise TransportError(f"Accept failed: {exc}") from exc
        client.settimeout(None)
        log.info(f"Accepted peer connection from {peer[0]}:{peer[1]}")
        return TcpTransport(client)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "TcpListener":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def listen(host: str, port: int, timeout: Optional[float] = None) -> TcpTransport:
    """Wait for one peer connection"""
    with TcpListener(host, port, timeout) as listener:
        log.info(f"Listening on {host}:{listener.port}")
        return listener.accept()


def connect(host: str, port: int, retries: int = 20, delay: float = 0.5) -> TcpTransport:
    """Connect to a listening peer, retrying while it starts up"""
    last_error: Optional[OSError] = None
    for _ in range(max(1, retries)):
        try:
            sock = socket.create_connection((host, port))
            log.info(f"Connected to {host}:{port}")
            return TcpTransport(sock)
        except OSError as exc:
            last_error = exc
            time.sleep(delay)
    raise TransportError(f"Cannot connect to {host}:{port}: {last_error}")


class TransportWrapper(Transport):
    """
    Delegates to an inner transport. Subclasses override ``send`` / ``receive``
    to transform frames, e.g. to attach an encrypted channel.
    """

    def __init__(self, inner: Transport):
        self.inner = inner

    def send(self, payload: bytes) -> None:
        self.inner.send(payload)

    def receive(self) -> bytes:
        return self.inner.receive()

    def close(self) -> None:
        self.inner.close()


class RecordingTransport(TransportWrapper):
    """Keeps a copy of every frame sent and received"""

    def __init__(self, inner: Transport):
        super().__init__(inner)
        self.sent: List[bytes] = []
        self.received: List[bytes] = []

    def send(self, payload: bytes) -> None:
        self.sent.append(bytes(payload))
        super().send(payload)

    def receive(self) -> bytes:
        payload = super().receive()
        self.received.append(payload)
        return payload
