"""Classical channel between Alice and Bob.

Wire format (all integers big-endian)::

    length[4B] | type_tag[1B] | payload[length - 1 B]

    0x01 ControlResult   payload = bit[1B] run_index[4B]
    0x02 Abort           payload = run_index[4B]
    0x03 Done            payload = run_index[4B]
    0x04 ModeAnnounce    payload = mode[1B] (0 message, 1 control) run_index[4B]

Qubits never cross this channel; only the classical protocol messages do.
"""
from __future__ import annotations

import queue
import socket
import struct
import threading
from dataclasses import dataclass
from enum import Enum, IntEnum

MAX_FRAME_LENGTH = 1 << 20
_LEN = struct.Struct(">I")
_RUN = struct.Struct(">I")


class ChannelError(Exception):
    pass


class NeedMoreData(ChannelError):
    """The buffer does not yet hold a complete frame."""


class ProtocolError(ChannelError):
    """The bytes cannot be a valid frame."""


class ChannelClosed(ChannelError):
    pass


class MessageKind(IntEnum):
    CONTROL_RESULT = 0x01
    ABORT = 0x02
    DONE = 0x03
    MODE_ANNOUNCE = 0x04


class RunMode(str, Enum):
    MESSAGE = "Message"
    CONTROL = "Control"


_MODE_BYTE = {RunMode.MESSAGE: 0, RunMode.CONTROL: 1}
_BYTE_MODE = {v: k for k, v in _MODE_BYTE.items()}


@dataclass(frozen=True)
class ClassicalMessage:
    kind: MessageKind
    run_index: int
    bit: int | None = None
    mode: RunMode | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MessageKind(self.kind))
        if not 0 <= self.run_index < 2**32:
            raise ValueError(f"run_index out of range: {self.run_index}")
        if self.kind is MessageKind.CONTROL_RESULT:
            if self.bit not in (0, 1):
                raise ValueError("ControlResult carries exactly one bit")
        elif self.bit is not None:
            raise ValueError(f"{self.kind.name} carries no bit")
        if self.kind is MessageKind.MODE_ANNOUNCE:
            object.__setattr__(self, "mode", RunMode(self.mode))
        elif self.mode is not None:
            raise ValueError(f"{self.kind.name} carries no mode")

    @classmethod
    def control_result(cls, i: int, run_index: int) -> "ClassicalMessage":
        return cls(MessageKind.CONTROL_RESULT, run_index, bit=i)

    @classmethod
    def abort(cls, run_index: int) -> "ClassicalMessage":
        return cls(MessageKind.ABORT, run_index)

    @classmethod
    def done(cls, run_index: int) -> "ClassicalMessage":
        return cls(MessageKind.DONE, run_index)

    @classmethod
    def mode_announce(cls, mode: RunMode, run_index: int) -> "ClassicalMessage":
        return cls(MessageKind.MODE_ANNOUNCE, run_index, mode=mode)


def encode_frame(msg: ClassicalMessage) -> bytes:
    run = _RUN.pack(msg.run_index)
    if msg.kind is MessageKind.CONTROL_RESULT:
        body = bytes([msg.bit]) + run
    elif msg.kind is MessageKind.MODE_ANNOUNCE:
        body = bytes([_MODE_BYTE[msg.mode]]) + run
    else:
        body = run
    return _LEN.pack(1 + len(body)) + bytes([msg.kind]) + body


def _parse_body(tag: int, payload: bytes) -> ClassicalMessage:
    try:
        kind = MessageKind(tag)
    except ValueError:
        raise ProtocolError(f"unknown frame type tag 0x{tag:02x}") from None
    expected = 5 if kind in (MessageKind.CONTROL_RESULT, MessageKind.MODE_ANNOUNCE) else 4
    if len(payload) != expected:
        raise ProtocolError(f"{kind.name} payload must be {expected} bytes, got {len(payload)}")
    (run_index,) = _RUN.unpack(payload[-4:])
    if kind is MessageKind.CONTROL_RESULT:
        if payload[0] not in (0, 1):
            raise ProtocolError(f"control bit must be 0 or 1, got {payload[0]}")
        return ClassicalMessage.control_result(payload[0], run_index)
    if kind is MessageKind.MODE_ANNOUNCE:
        if payload[0] not in _BYTE_MODE:
            raise ProtocolError(f"unknown mode byte {payload[0]}")
        return ClassicalMessage.mode_announce(_BYTE_MODE[payload[0]], run_index)
    return ClassicalMessage(kind, run_index)


def split_frame(buf: bytes | bytearray | memoryview) -> tuple[ClassicalMessage, int]:
    """Decode the frame at the start of ``buf``; return it and bytes consumed."""
    buf = bytes(buf)
    if len(buf) < _LEN.size:
        raise NeedMoreData(f"need {_LEN.size} header bytes, have {len(buf)}")
    (length,) = _LEN.unpack_from(buf)
    if length < 1:
        raise ProtocolError("frame length must be >= 1")
    if length > MAX_FRAME_LENGTH:
        raise ProtocolError(f"frame length {length} exceeds {MAX_FRAME_LENGTH}")
    end = _LEN.size + length
    if len(buf) < end:
        raise NeedMoreData(f"frame needs {end} bytes, have {len(buf)}")
    return _parse_body(buf[_LEN.size], buf[_LEN.size + 1 : end]), end


def decode_frame(data: bytes) -> ClassicalMessage:
    """Decode exactly one complete frame."""
    msg, used = split_frame(data)
    if used != len(data):
        raise ProtocolError(f"{len(data) - used} trailing bytes after frame")
    return msg


class FrameDecoder:
    """Incremental decoder: feed arbitrary byte chunks, collect messages."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> list[ClassicalMessage]:
        self._buf.extend(chunk)
        out = []
        while True:
            try:
                msg, used = split_frame(self._buf)
            except NeedMoreData:
                return out
            del self._buf[:used]
            out.append(msg)

    @property
    def pending(self) -> int:
        return len(self._buf)


class _Pipe:
    def __init__(self) -> None:
        self.q: queue.Queue = queue.Queue()
        self.closed = threading.Event()


class DuplexEndpoint:
    """One end of an in-memory, ordered, lossless duplex channel."""

    def __init__(self, outgoing: _Pipe, incoming: _Pipe, name: str = ""):
        self._out = outgoing
        self._in = incoming
        self.name = name

    def send(self, msg: ClassicalMessage) -> None:
        if self._out.closed.is_set():
            raise ChannelClosed(f"send on closed channel {self.name}")
        self._out.q.put(msg)

    def recv(self, timeout: float | None = 5.0) -> ClassicalMessage:
        try:
            return self._in.q.get_nowait()
        except queue.Empty:
            pass
        if self._in.closed.is_set():
            raise ChannelClosed(f"receive on empty closed channel {self.name}")
        try:
            return self._in.q.get(timeout=timeout)
        except queue.Empty:
            if self._in.closed.is_set():
                raise ChannelClosed(f"receive on empty closed channel {self.name}") from None
            raise ChannelError(f"receive timed out on {self.name}") from None

    def close(self) -> None:
        self._out.closed.set()
        self._in.closed.set()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def make_duplex_pair() -> tuple[DuplexEndpoint, DuplexEndpoint]:
    a_to_b, b_to_a = _Pipe(), _Pipe()
    return DuplexEndpoint(a_to_b, b_to_a, "A"), DuplexEndpoint(b_to_a, a_to_b, "B")


class StreamEndpoint:
    """Frame-codec endpoint over a connected stream socket."""

    def __init__(self, sock: socket.socket, name: str = ""):
        self.sock = sock
        self.name = name
        self._decoder = FrameDecoder()
        self._ready: list[ClassicalMessage] = []
        self._closed = False

    def send(self, msg: ClassicalMessage) -> None:
        if self._closed:
            raise ChannelClosed(f"send on closed channel {self.name}")
        try:
            self.sock.sendall(encode_frame(msg))
        except OSError as exc:
            raise ChannelClosed(f"send failed on {self.name}: {exc}") from exc

    def recv(self, timeout: float | None = 5.0) -> ClassicalMessage:
        while not self._ready:
            if self._closed:
                raise ChannelClosed(f"receive on closed channel {self.name}")
            self.sock.settimeout(timeout)
            try:
                chunk = self.sock.recv(4096)
            except socket.timeout:
                raise ChannelError(f"receive timed out on {self.name}") from None
            except OSError as exc:
                raise ChannelClosed(f"receive failed on {self.name}: {exc}") from exc
            if not chunk:
                if self._decoder.pending:
                    raise ProtocolError("stream closed in the middle of a frame")
                raise ChannelClosed(f"peer closed {self.name}")
            self._ready.extend(self._decoder.feed(chunk))
        return self._ready.pop(0)

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                self.sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def loopback_pair(port: int = 0, host: str = "127.0.0.1") -> tuple[StreamEndpoint, StreamEndpoint]:
    """Two endpoints joined by a TCP connection over loopback.

    ``port=0`` lets the OS pick a free port.
    """
    with socket.create_server((host, port)) as server:
        client = socket.create_connection(server.getsockname()[:2])
        conn, _ = server.accept()
    for s in (client, conn):
        s.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return StreamEndpoint(client, "A"), StreamEndpoint(conn, "B")
