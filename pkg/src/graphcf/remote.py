"""Wire-protocol client for classifiers living in other processes.

The protocol is newline-delimited JSON, one request/response pair per
line, over a child process's stdin/stdout or a TCP connection:

    -> {"type": "hello", "schema_version": 1, "n_vertices": N}
    <- {"type": "ready"}
    -> {"type": "classify", "edges": [[0, 1], [2, 3]]}
    <- {"type": "label", "label": 0}

``edges`` always uses canonical ``u < v`` pairs; labels are the integers
0 or 1. Anything else — unknown message types, labels outside {0, 1},
``error`` responses, torn connections, or a response that fails to arrive
inside the timeout — is a protocol violation: the session is closed and
the error propagates so the search can abort with its best-so-far result.
"""

from __future__ import annotations

import json
import os
import selectors
import shlex
import socket
import subprocess
import time

from .graphs import Graph, VertexUniverse
from .oracles import BackendFailureError

SCHEMA_VERSION = 1
DEFAULT_TIMEOUT = 30.0
TIMEOUT_ENV_VAR = "GRAPHCF_ORACLE_TIMEOUT"


class ProtocolError(BackendFailureError):
    """The peer broke the wire protocol."""


class OracleTimeoutError(BackendFailureError):
    """No response within the per-query timeout."""


def default_timeout() -> float:
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw:
        try:
            return float(raw)
        except ValueError:
            pass
    return DEFAULT_TIMEOUT


class _LineChannel:
    """Buffered line I/O with deadlines over raw file descriptors."""

    def __init__(self, read_fd: int, write_fd: int):
        self._read_fd = read_fd
        self._write_fd = write_fd
        self._buffer = b""
        self._selector = selectors.DefaultSelector()
        self._selector.register(read_fd, selectors.EVENT_READ)
        self._closed = False

    def send_line(self, line: str) -> None:
        data = line.encode() + b"\n"
        while data:
            sent = os.write(self._write_fd, data)
            data = data[sent:]

    def recv_line(self, timeout: float) -> str:
        deadline = time.monotonic() + timeout
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = self._buffer[:newline]
                self._buffer = self._buffer[newline + 1:]
                return line.decode()
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise OracleTimeoutError(f"no response within {timeout:.1f}s")
            if not self._selector.select(remaining):
                continue
            chunk = os.read(self._read_fd, 65536)
            if not chunk:
                raise ProtocolError("connection closed by the oracle process")
            self._buffer += chunk

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._selector.close()


class ExternalOracle:
    """Session speaking the wire protocol; usable as an OracleSession backend."""

    def __init__(
        self,
        channel: _LineChannel,
        universe: VertexUniverse,
        timeout: float,
        *,
        process: subprocess.Popen | None = None,
        sock: socket.socket | None = None,
        descriptor: str = "external",
    ):
        self.universe = universe
        self.timeout = timeout
        self._channel = channel
        self._process = process
        self._sock = sock
        self._descriptor = descriptor
        self._handshake()

    @classmethod
    def spawn(
        cls,
        command: str | list[str],
        universe: VertexUniverse,
        timeout: float | None = None,
    ) -> "ExternalOracle":
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
            )
        except OSError as exc:
            raise BackendFailureError(f"could not start oracle process {argv!r}: {exc}") from exc
        channel = _LineChannel(proc.stdout.fileno(), proc.stdin.fileno())
        return cls(
            channel,
            universe,
            timeout if timeout is not None else default_timeout(),
            process=proc,
            descriptor=f"exec:{' '.join(argv)}",
        )

    @classmethod
    def connect_tcp(
        cls,
        address: str,
        universe: VertexUniverse,
        timeout: float | None = None,
    ) -> "ExternalOracle":
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise BackendFailureError(f"tcp address must be host:port, got {address!r}")
        timeout = timeout if timeout is not None else default_timeout()
        try:
            sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as exc:
            raise BackendFailureError(f"could not connect to {address}: {exc}") from exc
        sock.setblocking(False)
        channel = _LineChannel(sock.fileno(), sock.fileno())
        return cls(channel, universe, timeout, sock=sock, descriptor=f"tcp:{address}")

    def _handshake(self) -> None:
        self._send({"type": "hello", "schema_version": SCHEMA_VERSION,
                    "n_vertices": self.universe.n})
        reply = self._recv()
        if reply.get("type") != "ready":
            self._fail(f"expected ready after hello, got {reply!r}")

    def _send(self, message: dict) -> None:
        try:
            self._channel.send_line(json.dumps(message, separators=(",", ":")))
        except OSError as exc:
            self._fail(f"write to oracle failed: {exc}")

    def _recv(self) -> dict:
        try:
            line = self._channel.recv_line(self.timeout)
        except (ProtocolError, OracleTimeoutError):
            self.close()
            raise
        except OSError as exc:
            self._fail(f"read from oracle failed: {exc}")
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            self._fail(f"oracle sent a non-JSON line: {line!r}")
        if not isinstance(message, dict):
            self._fail(f"oracle sent a non-object message: {line!r}")
        return message

    def _fail(self, reason: str):
        self.close()
        raise ProtocolError(reason)

    def classify(self, graph: Graph) -> int:
        self.universe.require_compatible(graph.universe)
        self._send({"type": "classify", "edges": graph.edges()})
        reply = self._recv()
        kind = reply.get("type")
        if kind == "error":
            self._fail(f"oracle reported an error: {reply.get('message')!r}")
        if kind != "label":
            self._fail(f"expected a label message, got {reply!r}")
        label = reply.get("label")
        if label not in (0, 1):
            self._fail(f"oracle returned label {label!r}, not 0 or 1")
        return int(label)

    def describe(self) -> str:
        return self._descriptor

    def close(self) -> None:
        self._channel.close()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None
        if self._process is not None:
            proc, self._process = self._process, None
            for stream in (proc.stdin, proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass
            try:
                proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def connect_oracle(target: str, universe: VertexUniverse,
                   timeout: float | None = None) -> ExternalOracle:
    """Resolve an ``exec:<command>`` or ``tcp:<host:port>`` oracle target."""
    if target.startswith("exec:"):
        return ExternalOracle.spawn(target[len("exec:"):], universe, timeout)
    if target.startswith("tcp:"):
        return ExternalOracle.connect_tcp(target[len("tcp:"):], universe, timeout)
    raise BackendFailureError(f"unknown oracle target {target!r}; use exec: or tcp:")
