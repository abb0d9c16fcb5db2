"""Minimal RFC 6455 WebSocket framing over blocking sockets.

Just enough for the gateway and its tests: the opening handshake, unfragmented
text frames with 7/16/64-bit lengths, client-side masking, ping/pong, and the
close handshake.  No extensions, no compression.
"""

from __future__ import annotations

import base64
import hashlib
import os
import socket
import struct

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class HandshakeError(RuntimeError):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def read_http_head(sock: socket.socket) -> tuple[str, dict[str, str], bytes]:
    """Read one HTTP request/response head.

    Returns (start line, headers, leftover).  Frames often arrive coalesced
    with the head in one segment; the leftover bytes past the blank line
    belong to the frame stream and must be fed back to the frame reader.
    """
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise HandshakeError("connection closed during HTTP head")
        data += chunk
        if len(data) > 65536:
            raise HandshakeError("HTTP head too large")
    head, leftover = data.split(b"\r\n\r\n", 1)
    lines = head.decode("latin-1").split("\r\n")
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" in line:
            name, value = line.split(":", 1)
            headers[name.strip().lower()] = value.strip()
    return lines[0], headers, leftover


def server_handshake_response(headers: dict[str, str]) -> bytes:
    key = headers.get("sec-websocket-key")
    if not key or headers.get("upgrade", "").lower() != "websocket":
        raise HandshakeError("not a websocket upgrade request")
    return (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    ).encode()


def client_handshake(sock: socket.socket, host: str, path: str = "/ws") -> bytes:
    """Perform the client handshake; returns frame bytes read past the head."""
    key = base64.b64encode(os.urandom(16)).decode()
    request = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\n"
        "Sec-WebSocket-Version: 13\r\n"
        "\r\n"
    ).encode()
    sock.sendall(request)
    status, headers, leftover = read_http_head(sock)
    if "101" not in status:
        raise HandshakeError(f"unexpected handshake status: {status}")
    if headers.get("sec-websocket-accept") != accept_key(key):
        raise HandshakeError("bad Sec-WebSocket-Accept")
    return leftover


def write_frame(sock: socket.socket, opcode: int, payload: bytes, mask: bool) -> None:
    head = bytes([0x80 | opcode])
    length = len(payload)
    mask_bit = 0x80 if mask else 0x00
    if length < 126:
        head += bytes([mask_bit | length])
    elif length < 65536:
        head += bytes([mask_bit | 126]) + struct.pack(">H", length)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", length)
    if mask:
        key = os.urandom(4)
        masked = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        sock.sendall(head + key + masked)
    else:
        sock.sendall(head + payload)


class WebSocketConnection:
    """One endpoint of an open WebSocket; clients mask, servers do not.

    ``initial`` holds frame bytes that arrived coalesced with the handshake.
    """

    def __init__(self, sock: socket.socket, mask: bool, initial: bytes = b"") -> None:
        self.sock = sock
        self.mask = mask
        self.open = True
        self._buffer = initial

    def _recv_exact(self, length: int) -> bytes:
        while len(self._buffer) < length:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("socket closed mid-frame")
            self._buffer += chunk
        data, self._buffer = self._buffer[:length], self._buffer[length:]
        return data

    def _read_frame(self) -> tuple[int, bytes]:
        first, second = self._recv_exact(2)
        opcode = first & 0x0F
        masked = bool(second & 0x80)
        length = second & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", self._recv_exact(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", self._recv_exact(8))
        key = self._recv_exact(4) if masked else b""
        payload = self._recv_exact(length) if length else b""
        if masked:
            payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        return opcode, payload

    def send_text(self, text: str) -> None:
        write_frame(self.sock, OP_TEXT, text.encode(), self.mask)

    def recv_text(self) -> str | None:
        """Next text payload, or None once the peer closes."""
        while True:
            try:
                opcode, payload = self._read_frame()
            except (ConnectionError, OSError):
                self.open = False
                return None
            if opcode == OP_TEXT:
                return payload.decode()
            if opcode == OP_PING:
                write_frame(self.sock, OP_PONG, payload, self.mask)
                continue
            if opcode == OP_PONG:
                continue
            if opcode == OP_CLOSE:
                if self.open:
                    try:
                        write_frame(self.sock, OP_CLOSE, payload[:2], self.mask)
                    except OSError:
                        pass
                self.open = False
                return None
            # Ignore continuation/binary frames; nothing in this protocol uses them.

    def close(self, code: int = 1000, reason: str = "") -> None:
        if not self.open:
            return
        payload = struct.pack(">H", code) + reason.encode()[:120]
        try:
            write_frame(self.sock, OP_CLOSE, payload, self.mask)
        except OSError:
            pass
        self.open = False
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def connect(host: str, port: int, path: str = "/ws", timeout: float = 10.0) -> WebSocketConnection:
    sock = socket.create_connection((host, port), timeout=timeout)
    leftover = client_handshake(sock, f"{host}:{port}", path)
    sock.settimeout(timeout)
    return WebSocketConnection(sock, mask=True, initial=leftover)
