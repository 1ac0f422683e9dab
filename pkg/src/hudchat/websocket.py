"""Minimal server-side RFC 6455 transport over asyncio streams.

Text messages only; pings are answered transparently and fragmented
messages are reassembled. Enough protocol for the browser overlay, no
extensions, no TLS.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_MAX_MESSAGE_BYTES = 1 << 20

_OP_CONT = 0x0
_OP_TEXT = 0x1
_OP_BINARY = 0x2
_OP_CLOSE = 0x8
_OP_PING = 0x9
_OP_PONG = 0xA


class HandshakeError(Exception):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


async def accept(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> str:
    """Perform the opening handshake; returns the requested path (with query)."""
    try:
        raw = await reader.readuntil(b"\r\n\r\n")
    except (asyncio.IncompleteReadError, asyncio.LimitOverrunError) as e:
        raise HandshakeError("incomplete HTTP request") from e
    lines = raw.decode("latin-1").split("\r\n")
    parts = lines[0].split(" ")
    if len(parts) != 3 or parts[0] != "GET":
        raise HandshakeError(f"bad request line: {lines[0]!r}")
    path = parts[1]
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" in line:
            k, v = line.split(":", 1)
            headers[k.strip().lower()] = v.strip()
    if "websocket" not in headers.get("upgrade", "").lower():
        raise HandshakeError("not a websocket upgrade")
    key = headers.get("sec-websocket-key")
    if not key:
        raise HandshakeError("missing sec-websocket-key")
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    )
    writer.write(response.encode("latin-1"))
    await writer.drain()
    return path


def _frame(opcode: int, payload: bytes) -> bytes:
    head = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head.append(n)
    elif n < 1 << 16:
        head.append(126)
        head += n.to_bytes(2, "big")
    else:
        head.append(127)
        head += n.to_bytes(8, "big")
    return bytes(head) + payload


class WsConnection:
    """One accepted websocket; recv_text returns None once the peer closes."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer
        self._closed = False

    def send_text(self, text: str) -> None:
        if not self._closed:
            self.writer.write(_frame(_OP_TEXT, text.encode("utf-8")))

    async def recv_text(self) -> str | None:
        buffer = bytearray()
        while True:
            try:
                head = await self.reader.readexactly(2)
                opcode = head[0] & 0x0F
                fin = bool(head[0] & 0x80)
                masked = bool(head[1] & 0x80)
                length = head[1] & 0x7F
                if length == 126:
                    length = int.from_bytes(await self.reader.readexactly(2), "big")
                elif length == 127:
                    length = int.from_bytes(await self.reader.readexactly(8), "big")
                if length > _MAX_MESSAGE_BYTES:
                    await self.close()
                    return None
                mask = await self.reader.readexactly(4) if masked else b""
                payload = await self.reader.readexactly(length) if length else b""
            except (asyncio.IncompleteReadError, ConnectionResetError):
                self._closed = True
                return None
            if mask:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == _OP_CLOSE:
                await self.close(echo=payload[:2])
                return None
            if opcode == _OP_PING:
                self.writer.write(_frame(_OP_PONG, payload))
                continue
            if opcode == _OP_PONG:
                continue
            if opcode in (_OP_TEXT, _OP_BINARY, _OP_CONT):
                buffer += payload
                if len(buffer) > _MAX_MESSAGE_BYTES:
                    await self.close()
                    return None
                if fin:
                    try:
                        return buffer.decode("utf-8")
                    except UnicodeDecodeError:
                        await self.close()
                        return None
                continue
            # unknown opcode: drop the connection rather than guess
            await self.close()
            return None

    async def close(self, echo: bytes = b"") -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self.writer.write(_frame(_OP_CLOSE, echo))
            await self.writer.drain()
        except (ConnectionResetError, BrokenPipeError):
            pass
        self.writer.close()
