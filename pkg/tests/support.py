"""Shared generators and protocol clients for the tests: reachable session
states, event streams, wire frames, and minimal TCP/websocket clients.
Randomized helpers take a caller-supplied random.Random so failures
reproduce from a seed."""

from __future__ import annotations

import asyncio
import base64
import random

from hudchat import engine, grammar
from hudchat.engine import SessionState
from hudchat.grammar import Command
from hudchat.wire import FRAME_TYPES, WireFrame, decode_frame, encode_frame

CONTACT_POOL = ["Peter", "Mary", "Bob", "Ann Lee", "zoë"]

VOICE_PHRASES = [
    "show chat", "hide chat", "open notification", "voice message", "send",
    "open keyboard", "close keyboard", "scroll to the top", "scroll up",
    "scroll down", "reply",
]


def random_text(rng: random.Random, max_len: int = 24) -> str:
    n = rng.randint(0, max_len)
    chars = []
    for _ in range(n):
        cp = rng.randint(0, 0x10FFFF)
        if 0xD800 <= cp <= 0xDFFF:  # surrogates are not valid code points
            cp = rng.randint(0x20, 0x7E)
        chars.append(chr(cp))
    return "".join(chars)


def random_utterance_text(rng: random.Random, contacts: list[str]) -> str:
    roll = rng.random()
    if roll < 0.35:
        return rng.choice(VOICE_PHRASES)
    if roll < 0.5 and contacts:
        return rng.choice(contacts)
    if roll < 0.6 and contacts:
        return f"text {rng.choice(contacts)}"
    if roll < 0.7:
        return rng.choice(["see you at five", "on my way", "ok", "running late"])
    return random_text(rng)


def random_command(rng: random.Random, contacts: list[str]) -> Command:
    kind = rng.choice([
        grammar.REVEAL_INTERFACE, grammar.HIDE_INTERFACE,
        grammar.OPEN_NOTIFICATION, grammar.SELECT_CONTACT,
        grammar.START_DICTATION, grammar.SEND, grammar.OPEN_KEYBOARD,
        grammar.CLOSE_KEYBOARD, grammar.SCROLL_TO_TOP, grammar.SCROLL_UP,
        grammar.SCROLL_DOWN, grammar.REPLY, grammar.TEXT_TO,
        grammar.APPEND_TRANSCRIPT, grammar.FOCUS_NEXT,
        grammar.ACTIVATE_FOCUSED, grammar.NO_COMMAND,
    ])
    if kind in (grammar.SELECT_CONTACT, grammar.TEXT_TO):
        name = rng.choice(contacts) if contacts and rng.random() < 0.9 else "Nobody"
        return Command(kind, name)
    if kind == grammar.APPEND_TRANSCRIPT:
        return Command(kind, rng.choice(["ok", "see you soon", "yes", "no problem"]))
    return Command(kind)


def step_random(rng: random.Random, state: SessionState, t: int) -> tuple[SessionState, int]:
    """Apply one random event (command, incoming message, or tick)."""
    t += rng.randint(1, 400)
    roll = rng.random()
    try:
        if roll < 0.65:
            contacts = [c.name for c in state.contacts]
            state, _ = engine.handle_command(state, random_command(rng, contacts), t)
        elif roll < 0.85:
            sender = rng.choice(CONTACT_POOL)
            n = len(state.history.get(sender, ())) + 1
            msg = engine.Message(id=f"in~{sender}-{n}", sender=sender,
                                 recipient="self", body=random_text(rng, 12) or "hi",
                                 ts_ms=t)
            state, _ = engine.handle_incoming(state, msg, t)
        else:
            state, _ = engine.tick(state, t)
    except ValueError:
        pass  # clock contract violations cannot occur here; keep walking
    return state, t


def random_reachable_state(
    rng: random.Random, steps: int | None = None
) -> tuple[SessionState, int]:
    """A state reached from a fresh session by a short random event walk."""
    roster = rng.sample(CONTACT_POOL, rng.randint(1, 3))
    state = engine.initial_state(roster)
    t = 0
    for _ in range(steps if steps is not None else rng.randint(0, 14)):
        state, t = step_random(rng, state, t)
    return state, t


def random_trace_events(rng: random.Random, n: int, contacts: list[str]) -> list[dict]:
    """Trace-style event dicts ({"t", "kind", ...}) with non-decreasing t."""
    t = 0
    events = []
    for _ in range(n):
        t += rng.randint(0, 250)
        roll = rng.random()
        if roll < 0.35:
            ev = {"kind": "utterance",
                  "text": random_utterance_text(rng, contacts)}
        elif roll < 0.5:
            press = rng.choice(["click", "hold"])
            ev = {"kind": "ring",
                  "button": rng.choice(["up", "down", "left", "right", "center"]),
                  "press": press,
                  "duration_ms": rng.choice([400, 1000, 1500]) if press == "hold" else 0}
        elif roll < 0.65:
            ev = {"kind": "gesture",
                  "gesture": rng.choice(["press", "swipe_up", "swipe_down"]),
                  "target": rng.choice(["notification", "contact", "voice_button",
                                        "keyboard_button", "send_button", "anywhere"]),
                  "name": rng.choice(contacts) if contacts else ""}
        elif roll < 0.75:
            ev = {"kind": "keyboard_text", "text": random_text(rng, 10)}
        elif roll < 0.9:
            ev = {"kind": "incoming", "sender": rng.choice(CONTACT_POOL),
                  "body": random_text(rng, 16) or "hello"}
        else:
            ev = {"kind": "tick"}
        ev["t"] = t
        events.append(ev)
    return events


def event_payload(ev: dict) -> dict:
    """The payload as metrics.parse_trace would extract it from a line."""
    return {k: v for k, v in ev.items() if k not in ("t", "kind")}


def random_frame(rng: random.Random) -> WireFrame:
    return WireFrame(
        type=rng.choice(FRAME_TYPES),
        id=random_text(rng, 12),
        from_=random_text(rng, 8),
        to=random_text(rng, 8),
        body=random_text(rng, 64),
        ts=rng.randint(0, 2**53),
        seq=rng.randint(0, 2**31),
    )


class LineClient:
    """Small TCP client speaking the newline-delimited frame protocol.

    recv_frame reads the next frame of any type; send_msg reads frames
    until the matching ack arrives, parking deliveries in `inbox`.
    """

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter,
                 name: str):
        self.reader = reader
        self.writer = writer
        self.name = name
        self.inbox: list[WireFrame] = []

    @classmethod
    async def connect(cls, host: str, port: int, name: str) -> "LineClient":
        reader, writer = await asyncio.open_connection(host, port)
        client = cls(reader, writer, name)
        await client.send_frame(WireFrame(type="hello", from_=name))
        ack = await client.recv_frame()
        assert ack.type == "hello_ack", ack
        return client

    async def send_frame(self, f: WireFrame) -> None:
        self.writer.write(encode_frame(f))
        await self.writer.drain()

    async def recv_frame(self, timeout: float = 5.0) -> WireFrame:
        line = await asyncio.wait_for(self.reader.readline(), timeout)
        assert line, "connection closed"
        return decode_frame(line)

    async def send_msg(self, to: str, body: str) -> WireFrame:
        await self.send_frame(WireFrame(type="msg", from_=self.name, to=to, body=body))
        while True:
            frame = await self.recv_frame()
            if frame.type == "ack":
                return frame
            self.inbox.append(frame)

    async def recv_msg(self, timeout: float = 5.0) -> WireFrame:
        while True:
            if self.inbox:
                frame = self.inbox.pop(0)
            else:
                frame = await self.recv_frame(timeout)
            if frame.type == "msg":
                return frame

    async def close(self) -> None:
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionResetError, BrokenPipeError):
            pass


class WsTestClient:
    """Client half of the websocket protocol, enough to drive a UI session."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer
        self._rng = random.Random(0xC0FFEE)

    @classmethod
    async def connect(cls, host: str, port: int, path: str) -> "WsTestClient":
        reader, writer = await asyncio.open_connection(host, port)
        key = base64.b64encode(bytes(range(16))).decode("ascii")
        request = (
            f"GET {path} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n"
            "\r\n"
        )
        writer.write(request.encode("latin-1"))
        await writer.drain()
        status = await reader.readuntil(b"\r\n\r\n")
        assert b"101" in status.split(b"\r\n")[0], status
        return cls(reader, writer)

    async def send_text(self, text: str) -> None:
        payload = text.encode("utf-8")
        mask = bytes(self._rng.randrange(256) for _ in range(4))
        head = bytearray([0x81])  # FIN + text
        n = len(payload)
        if n < 126:
            head.append(0x80 | n)
        elif n < 1 << 16:
            head.append(0x80 | 126)
            head += n.to_bytes(2, "big")
        else:
            head.append(0x80 | 127)
            head += n.to_bytes(8, "big")
        head += mask
        body = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        self.writer.write(bytes(head) + body)
        await self.writer.drain()

    async def recv_text(self, timeout: float = 5.0) -> str | None:
        while True:
            head = await asyncio.wait_for(self.reader.readexactly(2), timeout)
            opcode = head[0] & 0x0F
            length = head[1] & 0x7F
            if length == 126:
                length = int.from_bytes(await self.reader.readexactly(2), "big")
            elif length == 127:
                length = int.from_bytes(await self.reader.readexactly(8), "big")
            payload = await self.reader.readexactly(length) if length else b""
            if opcode == 0x8:
                return None
            if opcode in (0x9, 0xA):
                continue
            return payload.decode("utf-8")

    async def recv_frame(self, timeout: float = 5.0) -> WireFrame:
        text = await self.recv_text(timeout)
        assert text is not None, "websocket closed"
        return decode_frame(text)

    async def recv_render(self, timeout: float = 5.0) -> dict:
        """Next render payload, skipping protocol frames (acks etc.)."""
        import json as _json

        while True:
            frame = await self.recv_frame(timeout)
            if frame.type == "render":
                return _json.loads(frame.body)

    async def send_event(self, payload: dict) -> None:
        import json as _json

        frame = WireFrame(type="event", body=_json.dumps(payload))
        await self.send_text(encode_frame(frame).decode("utf-8").rstrip("\n"))

    async def close(self) -> None:
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionResetError, BrokenPipeError):
            pass
