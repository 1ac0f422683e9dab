"""The chat server: routing, persistence, bots, and both transports.

The Router is a synchronous core holding all registry state; every frame
from every connection funnels through Router.handle_frame on the single
event loop, so per-conversation ordering needs no locks. ChatServer wraps
it with a TCP listener (newline-delimited frames) and a websocket
listener for browser overlay sessions.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import engine, websocket
from .bots import BotScript, bot_step
from .engine import EngineConfig, Message, SessionState
from .wire import (
    MAX_FRAME_BYTES,
    FrameError,
    WireFrame,
    decode_frame,
    encode_frame,
    frame_dict,
)

DEFAULT_PORT = 7870
DEFAULT_WS_PORT = 7871
DEFAULT_HISTORY_DEPTH = 50

ConvKey = tuple[str, str]


def conv_key(a: str, b: str) -> ConvKey:
    return (a, b) if a <= b else (b, a)


def conv_label(a: str, b: str) -> str:
    return "~".join(conv_key(a, b))


class LogCorruption(Exception):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"conversation log corrupt at line {line_no}: {detail}")
        self.line_no = line_no


@dataclass
class RecoveredLog:
    histories: dict[ConvKey, list[WireFrame]] = field(default_factory=dict)
    next_seq: dict[ConvKey, int] = field(default_factory=dict)
    known_names: set[str] = field(default_factory=set)
    warnings: int = 0


def recover(log_path: str | Path) -> RecoveredLog:
    """Rebuild histories and sequence counters from a JSONL message log.

    A half-written final line (no trailing newline) is dropped with a
    warning; corruption anywhere else fails with its line number.
    Idempotent: recovering twice yields the same result.
    """
    out = RecoveredLog()
    path = Path(log_path)
    if not path.exists():
        return out
    data = path.read_bytes()
    if not data:
        return out
    complete = data.endswith(b"\n")
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    last = len(lines) - 1
    for i, line in enumerate(lines):
        try:
            frame = decode_frame(line)
        except FrameError as e:
            if i == last and not complete:
                out.warnings += 1
                break
            raise LogCorruption(i + 1, str(e)) from e
        if frame.type != "msg":
            raise LogCorruption(i + 1, f"unexpected frame type {frame.type!r}")
        key = conv_key(frame.from_, frame.to)
        expected = out.next_seq.get(key, 1)
        if frame.seq != expected:
            raise LogCorruption(
                i + 1, f"sequence gap in {key}: got {frame.seq}, expected {expected}"
            )
        out.histories.setdefault(key, []).append(frame)
        out.next_seq[key] = frame.seq + 1
        out.known_names.add(frame.from_)
        out.known_names.add(frame.to)
    return out


@dataclass
class RouteResult:
    to_sender: list[WireFrame] = field(default_factory=list)
    deliveries: list[tuple[str, WireFrame]] = field(default_factory=list)
    scheduled: list[tuple[int, WireFrame]] = field(default_factory=list)
    register: str | None = None  # bind the connection to this name


class Router:
    """Registry and routing rules; one instance per server, no I/O of its own
    except appending accepted messages to the conversation log."""

    def __init__(
        self,
        bots: list[BotScript] | None = None,
        history_depth: int = DEFAULT_HISTORY_DEPTH,
        log_path: str | Path | None = None,
    ):
        self.bots = {b.name: b for b in (bots or [])}
        self.history_depth = history_depth
        self.live: set[str] = set()
        self.queues: dict[str, list[WireFrame]] = {}
        recovered = recover(log_path) if log_path else RecoveredLog()
        self.histories = recovered.histories
        self.next_seq = recovered.next_seq
        self.known = recovered.known_names | set(self.bots)
        self.recovery_warnings = recovered.warnings
        self._log_fh = open(log_path, "ab") if log_path else None

    def close(self) -> None:
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None

    def mark_disconnected(self, name: str) -> None:
        self.live.discard(name)

    def _err(self, code: str, ref: WireFrame, now_ms: int) -> WireFrame:
        return WireFrame(type="err", body=code, id=ref.id, to=ref.from_, ts=now_ms)

    def handle_frame(
        self, f: WireFrame, now_ms: int, origin: str | None = None
    ) -> RouteResult:
        """Route one inbound frame. `origin` is the name the connection was
        bound to by its hello (bot injections pass the bot's name)."""
        if f.type == "hello":
            name = f.from_
            if not name:
                return RouteResult(to_sender=[self._err("bad_frame", f, now_ms)])
            if name in self.live or name in self.bots:
                return RouteResult(to_sender=[self._err("name_taken", f, now_ms)])
            self.live.add(name)
            self.known.add(name)
            ack = WireFrame(type="hello_ack", to=name, ts=now_ms)
            queued = self.queues.pop(name, [])
            return RouteResult(to_sender=[ack] + queued, register=name)

        if f.type == "msg":
            if origin is None:
                return RouteResult(to_sender=[self._err("not_registered", f, now_ms)])
            recipient = f.to
            if recipient not in self.known:
                return RouteResult(to_sender=[self._err("unknown_recipient", f, now_ms)])
            key = conv_key(origin, recipient)
            seq = self.next_seq.get(key, 1)
            assigned = WireFrame(
                type="msg",
                id=f"{conv_label(origin, recipient)}-{seq}",
                from_=origin,
                to=recipient,
                body=f.body,
                ts=now_ms,
                seq=seq,
            )
            self.next_seq[key] = seq + 1
            self.histories.setdefault(key, []).append(assigned)
            if self._log_fh:
                self._log_fh.write(encode_frame(assigned))
                self._log_fh.flush()
            result = RouteResult(
                to_sender=[WireFrame(type="ack", id=assigned.id, to=origin,
                                     ts=now_ms, seq=seq)]
            )
            if recipient in self.bots:
                result.scheduled = bot_step(self.bots[recipient], assigned, now_ms)
            elif recipient in self.live:
                result.deliveries.append((recipient, assigned))
            else:
                self.queues.setdefault(recipient, []).append(assigned)
            return result

        if f.type == "history_req":
            if origin is None:
                return RouteResult(to_sender=[self._err("not_registered", f, now_ms)])
            key = conv_key(origin, f.to)
            msgs = self.histories.get(key, [])[-self.history_depth:]
            body = json.dumps([frame_dict(m) for m in msgs],
                              ensure_ascii=False, separators=(",", ":"))
            return RouteResult(
                to_sender=[WireFrame(type="history", to=origin, body=body, ts=now_ms)]
            )

        # Server-originated types arriving inbound (ack, notify, history,
        # hello_ack, err) and bridge types handled elsewhere: ignore.
        return RouteResult()

    def history_with(self, name: str) -> list[WireFrame]:
        """All logged messages that involve `name`, in global arrival order."""
        frames = [
            m
            for key, msgs in self.histories.items()
            if name in key
            for m in msgs
        ]
        frames.sort(key=lambda m: (m.ts, m.id))
        return frames


class _LineReader:
    """Newline framing with a hard per-line cap; oversize lines are dropped
    whole and reported once, and the stream stays usable."""

    def __init__(self, reader: asyncio.StreamReader, cap: int = MAX_FRAME_BYTES):
        self.reader = reader
        self.cap = cap
        self.buf = bytearray()
        self.discard = False

    async def next_line(self) -> tuple[str, bytes]:
        """Returns ("line", data), ("oversize", b""), or ("eof", b"")."""
        while True:
            nl = self.buf.find(b"\n")
            if nl >= 0:
                line = bytes(self.buf[:nl])
                del self.buf[:nl + 1]
                if self.discard:
                    self.discard = False
                    return "oversize", b""
                if len(line) > self.cap:
                    return "oversize", b""
                return "line", line
            if self.discard:
                self.buf.clear()
            elif len(self.buf) > self.cap:
                self.discard = True
                self.buf.clear()
            data = await self.reader.read(65536)
            if not data:
                return "eof", b""
            self.buf += data


class UiSession:
    """Server-side session engine for one connected browser overlay.

    The browser sends raw input events; the engine runs here so every
    interaction invariant is enforced in one place. Each event (and each
    delivered message) pushes a fresh render frame back over the socket.
    """

    def __init__(
        self,
        name: str,
        conn: websocket.WsConnection,
        server: "ChatServer",
        config: EngineConfig,
    ):
        self.name = name
        self.conn = conn
        self.server = server
        contacts = sorted(server.router.bots)
        state = engine.initial_state(contacts, config)
        # Seed conversation content from the server log: the page holds no
        # conversation state of its own and reloads cleanly.
        for fr in server.router.history_with(name):
            peer = fr.to if fr.from_ == name else fr.from_
            sender = "self" if fr.from_ == name else fr.from_
            if all(c.name != peer for c in state.contacts):
                state.contacts.append(engine.Contact(name=peer))
            state.history.setdefault(peer, []).append(
                Message(id=fr.id, sender=sender, recipient=fr.to if sender == "self" else "self",
                        body=fr.body, ts_ms=fr.ts)
            )
            state.last_event_ms = max(state.last_event_ms, fr.ts)
        self.state = state

    def _now(self) -> int:
        return max(self.server.now_ms(), self.state.last_event_ms)

    def _expire_dictation(self, upto_ms: int) -> list[dict]:
        records = []
        deadline = engine.dictation_deadline(self.state)
        while deadline is not None and deadline <= upto_ms:
            self.state, effects = engine.tick(self.state, deadline)
            records += [engine.effect_record(deadline, e) for e in effects]
            deadline = engine.dictation_deadline(self.state)
        return records

    def handle_event(self, payload: dict) -> None:
        now = self._now()
        kind = payload.get("kind", "")
        if kind == "incoming":
            self._push_render([{"t": now, "effect": "error",
                                "data": {"code": "bad_frame"}}], now)
            return
        records = self._expire_dictation(now)
        now = self._now()
        try:
            self.state, effects = engine.apply_event(self.state, kind, payload, now)
        except ValueError:
            self._push_render([{"t": now, "effect": "error",
                                "data": {"code": "bad_frame"}}], now)
            return
        records += [engine.effect_record(now, e) for e in effects]
        for effect in effects:
            if isinstance(effect, engine.SendMessage):
                self.server.send_as(self.name, effect.message.recipient,
                                    effect.message.body)
        self._push_render(records, now)

    def on_delivery(self, fr: WireFrame) -> None:
        now = self._now()
        records = self._expire_dictation(now)
        now = self._now()
        msg = Message(id=fr.id, sender=fr.from_, recipient="self",
                      body=fr.body, ts_ms=fr.ts)
        self.state, effects = engine.handle_incoming(self.state, msg, now)
        records += [engine.effect_record(now, e) for e in effects]
        self._push_render(records, now)

    def _push_render(self, effect_records: list[dict], now: int) -> None:
        cfg = self.state.config
        body = json.dumps(
            {
                "t": now,
                "render": engine.render_to_dict(engine.render(self.state)),
                "effects": effect_records,
                "opacity": {
                    "base": cfg.base_opacity,
                    "boost": cfg.boost_opacity,
                    "boosted": sorted(engine.boosted_contacts(self.state, now)),
                },
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
        frame = WireFrame(type="render", to=self.name, body=body, ts=now)
        self.conn.send_text(encode_frame(frame).decode("utf-8").rstrip("\n"))


class ChatServer:
    def __init__(
        self,
        router: Router,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        ws_port: int | None = DEFAULT_WS_PORT,
        engine_config: EngineConfig | None = None,
        now_fn=None,
    ):
        self.router = router
        self.host = host
        self.port = port
        self.ws_port = ws_port
        self.engine_config = engine_config or EngineConfig()
        self._now_fn = now_fn or (lambda: time.time_ns() // 1_000_000)
        self._conns: dict[str, asyncio.StreamWriter] = {}
        self._ui: dict[str, UiSession] = {}
        self._timers: set[asyncio.TimerHandle] = set()
        self._tcp_server: asyncio.AbstractServer | None = None
        self._ws_server: asyncio.AbstractServer | None = None

    def now_ms(self) -> int:
        return self._now_fn()

    async def start(self) -> None:
        self._tcp_server = await asyncio.start_server(
            self._on_tcp, self.host, self.port
        )
        self.port = self._tcp_server.sockets[0].getsockname()[1]
        if self.ws_port is not None:
            self._ws_server = await asyncio.start_server(
                self._on_ws, self.host, self.ws_port
            )
            self.ws_port = self._ws_server.sockets[0].getsockname()[1]

    async def stop(self) -> None:
        for timer in self._timers:
            timer.cancel()
        self._timers.clear()
        for server in (self._tcp_server, self._ws_server):
            if server is not None:
                server.close()
                await server.wait_closed()
        for writer in list(self._conns.values()):
            writer.close()
        self._conns.clear()
        self._ui.clear()
        self.router.close()

    # --- dispatch ------------------------------------------------------

    def _deliver(self, name: str, frame: WireFrame) -> None:
        session = self._ui.get(name)
        if session is not None:
            session.on_delivery(frame)
            return
        writer = self._conns.get(name)
        if writer is not None:
            writer.write(encode_frame(frame))

    def _dispatch(self, result: RouteResult) -> None:
        for name, frame in result.deliveries:
            self._deliver(name, frame)
        for due_ms, frame in result.scheduled:
            self._schedule(due_ms, frame)

    def _schedule(self, due_ms: int, frame: WireFrame) -> None:
        loop = asyncio.get_running_loop()
        delay = max(0, due_ms - self.now_ms()) / 1000.0
        timer: asyncio.TimerHandle | None = None

        def fire() -> None:
            if timer is not None:
                self._timers.discard(timer)
            self._inject(frame)

        timer = loop.call_later(delay, fire)
        self._timers.add(timer)

    def _inject(self, frame: WireFrame) -> None:
        """Bot replies re-enter the router like any message; their acks go
        nowhere."""
        result = self.router.handle_frame(frame, self.now_ms(), origin=frame.from_)
        self._dispatch(result)

    def send_as(self, origin: str, recipient: str, body: str) -> None:
        """Inject a message on behalf of a UI session."""
        frame = WireFrame(type="msg", from_=origin, to=recipient, body=body)
        result = self.router.handle_frame(frame, self.now_ms(), origin=origin)
        session = self._ui.get(origin)
        if session is not None:
            for fr in result.to_sender:
                session.conn.send_text(encode_frame(fr).decode("utf-8").rstrip("\n"))
        self._dispatch(result)

    # --- TCP transport --------------------------------------------------

    async def _on_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        lines = _LineReader(reader)
        bound: str | None = None
        try:
            while True:
                status, line = await lines.next_line()
                if status == "eof":
                    break
                now = self.now_ms()
                if status == "oversize":
                    writer.write(encode_frame(
                        WireFrame(type="err", body="frame_too_large", ts=now)
                    ))
                    continue
                if not line.strip():
                    continue
                try:
                    frame = decode_frame(line)
                except FrameError as e:
                    writer.write(encode_frame(
                        WireFrame(type="err", body=e.code, ts=now)
                    ))
                    continue
                result = self.router.handle_frame(frame, now, origin=bound)
                for fr in result.to_sender:
                    writer.write(encode_frame(fr))
                if frame.type == "hello":
                    if result.register:
                        bound = result.register
                        self._conns[bound] = writer
                    else:
                        break  # refused (name_taken): drop this connection
                self._dispatch(result)
        except ConnectionResetError:
            pass
        finally:
            if bound is not None:
                self.router.mark_disconnected(bound)
                if self._conns.get(bound) is writer:
                    del self._conns[bound]
            writer.close()

    # --- websocket transport ---------------------------------------------

    async def _on_ws(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            path = await websocket.accept(reader, writer)
        except websocket.HandshakeError:
            writer.close()
            return
        conn = websocket.WsConnection(reader, writer)
        base, _, query = path.partition("?")
        if base != "/session":
            await conn.close()
            return
        params = dict(
            pair.partition("=")[::2] for pair in query.split("&") if pair
        )
        name = params.get("name", "self")

        now = self.now_ms()
        result = self.router.handle_frame(WireFrame(type="hello", from_=name), now)
        for fr in result.to_sender:
            conn.send_text(encode_frame(fr).decode("utf-8").rstrip("\n"))
        if not result.register:
            await conn.close()
            return
        session = UiSession(name, conn, self, self.engine_config)
        self._ui[name] = session
        # Queued offline deliveries ride in behind the hello_ack.
        for fr in result.to_sender:
            if fr.type == "msg":
                session.on_delivery(fr)
        session._push_render([], session._now())
        try:
            while True:
                text = await conn.recv_text()
                if text is None:
                    break
                try:
                    frame = decode_frame(text)
                except FrameError as e:
                    conn.send_text(encode_frame(
                        WireFrame(type="err", body=e.code, ts=self.now_ms())
                    ).decode("utf-8").rstrip("\n"))
                    continue
                if frame.type == "event":
                    try:
                        payload = json.loads(frame.body)
                    except json.JSONDecodeError:
                        payload = None
                    if not isinstance(payload, dict):
                        conn.send_text(encode_frame(
                            WireFrame(type="err", body="bad_frame", ts=self.now_ms())
                        ).decode("utf-8").rstrip("\n"))
                        continue
                    session.handle_event(payload)
                else:
                    result = self.router.handle_frame(
                        frame, self.now_ms(), origin=name
                    )
                    for fr in result.to_sender:
                        conn.send_text(encode_frame(fr).decode("utf-8").rstrip("\n"))
                    self._dispatch(result)
        finally:
            self.router.mark_disconnected(name)
            if self._ui.get(name) is session:
                del self._ui[name]
            await conn.close()


async def serve_forever(server: ChatServer) -> None:
    await server.start()
    try:
        await asyncio.Event().wait()
    finally:
        await server.stop()
