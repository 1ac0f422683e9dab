"""Entry points: serve | replay | client | bots-check.

Option precedence is flags > config file > built-in defaults. Exit codes:
0 success, 2 bad usage or unusable input files, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

from . import engine, metrics
from .bots import BotScriptError, load_bot_scripts
from .engine import EngineConfig, Message
from .server import (
    DEFAULT_HISTORY_DEPTH,
    DEFAULT_PORT,
    DEFAULT_WS_PORT,
    ChatServer,
    LogCorruption,
    Router,
)
from .wire import FrameError, WireFrame, decode_frame, encode_frame

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


@dataclass
class Config:
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    ws_port: int = DEFAULT_WS_PORT
    bots_path: str | None = None
    log_path: str | None = None
    silence_gap_ms: int = 2000
    seed: int = 0
    history_depth: int = DEFAULT_HISTORY_DEPTH


def load_config(path: str | Path | None, overrides: dict) -> Config:
    """Defaults, then the JSON config file, then explicit flag overrides."""
    cfg = Config()
    known = {f.name for f in fields(Config)}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ValueError("config file must be a JSON object")
        for key, value in doc.items():
            if key in known:
                setattr(cfg, key, value)
    for key, value in overrides.items():
        if value is not None and key in known:
            setattr(cfg, key, value)
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hudchat",
        description="Heads-up messaging: chat server, trace replayer, and scripted client.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the chat server")
    serve.add_argument("--config", help="JSON config file")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--ws-port", type=int, dest="ws_port")
    serve.add_argument("--bots", dest="bots_path", help="bot script file (JSON array)")
    serve.add_argument("--log", dest="log_path", help="conversation log (JSONL)")
    serve.add_argument("--history-depth", type=int, dest="history_depth")
    serve.add_argument("--seed", type=int)
    serve.add_argument("--silence-gap-ms", type=int, dest="silence_gap_ms")

    rep = sub.add_parser("replay", help="replay an input trace offline")
    rep.add_argument("--trace", required=True)
    rep.add_argument("--report", help="write the JSON report here")
    rep.add_argument("--effects", help="write the effect log (JSONL) here")
    rep.add_argument("--silence-gap-ms", type=int, dest="silence_gap_ms")

    cli = sub.add_parser("client", help="replay a trace against a live server")
    cli.add_argument("--config", help="JSON config file")
    cli.add_argument("--trace", required=True)
    cli.add_argument("--host")
    cli.add_argument("--port", type=int)
    cli.add_argument("--name", default="self")
    cli.add_argument("--report")
    cli.add_argument("--effects")
    cli.add_argument("--time-scale", type=float, default=1.0,
                     help="real seconds per trace second (0.1 = 10x faster)")
    cli.add_argument("--drain-ms", type=int, default=1500,
                     help="wait this long (real ms) after the last event for bot replies")
    cli.add_argument("--silence-gap-ms", type=int, dest="silence_gap_ms")

    chk = sub.add_parser("bots-check", help="validate a bot script file")
    chk.add_argument("--bots", required=True, dest="bots_path")
    return parser


# --- serve ---------------------------------------------------------------


def _cmd_serve(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config, vars(args))
    except (OSError, ValueError) as e:
        print(f"error: bad config: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        bots = load_bot_scripts(cfg.bots_path, cfg.seed) if cfg.bots_path else []
    except (OSError, json.JSONDecodeError, BotScriptError) as e:
        print(f"error: bad bot script file: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        router = Router(bots=bots, history_depth=cfg.history_depth,
                        log_path=cfg.log_path)
    except LogCorruption as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if router.recovery_warnings:
        print(f"warning: dropped {router.recovery_warnings} truncated log line(s)",
              file=sys.stderr)
    server = ChatServer(
        router,
        host=cfg.host,
        port=cfg.port,
        ws_port=cfg.ws_port,
        engine_config=EngineConfig(silence_gap_ms=cfg.silence_gap_ms),
    )

    async def run() -> int:
        try:
            await server.start()
        except OSError as e:
            print(f"error: cannot listen: {e}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"listening on {cfg.host}:{server.port} (tcp) and "
              f"{cfg.host}:{server.ws_port} (ws), {len(bots)} bot(s)",
              flush=True)
        try:
            await asyncio.Event().wait()
        except asyncio.CancelledError:
            pass
        finally:
            await server.stop()
        return EXIT_OK

    try:
        return asyncio.run(run())
    except KeyboardInterrupt:
        return EXIT_OK


# --- replay --------------------------------------------------------------


def _write_outputs(result, args) -> None:
    doc = json.dumps(result.report.to_dict(), indent=2)
    if args.report:
        Path(args.report).write_text(doc + "\n", encoding="utf-8")
    if args.effects:
        Path(args.effects).write_bytes(result.effect_log_bytes())
    print(doc)
    print()
    print(metrics.format_report_table(result.report))


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        trace = metrics.load_trace(args.trace)
    except OSError as e:
        print(f"error: cannot read trace: {e}", file=sys.stderr)
        return EXIT_USAGE
    except metrics.TraceError as e:
        print(f"error: bad trace: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.silence_gap_ms is not None:
        trace.header.silence_gap_ms = args.silence_gap_ms
    try:
        result = metrics.replay(trace)
    except metrics.TraceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    _write_outputs(result, args)
    return EXIT_OK


# --- scripted live client ---------------------------------------------------


class _LiveClient:
    """Drives a trace against a running server: local session engine, real
    sockets, bot-driven incoming messages."""

    def __init__(self, trace: metrics.InputTrace, name: str, time_scale: float,
                 drain_ms: int):
        self.trace = trace
        self.name = name
        self.time_scale = max(time_scale, 1e-6)
        self.drain_ms = drain_ms
        config = EngineConfig(silence_gap_ms=trace.header.silence_gap_ms)
        self.state = engine.initial_state(trace.header.contacts, config)
        self.records: list[dict] = []
        self.skipped_incoming = 0
        self._t0 = time.monotonic()

    def session_now(self) -> int:
        elapsed = (time.monotonic() - self._t0) * 1000.0
        return max(int(elapsed / self.time_scale), self.state.last_event_ms)

    def _record(self, t: int, effects) -> list[engine.SendMessage]:
        sends = []
        for e in effects:
            self.records.append(engine.effect_record(t, e))
            if isinstance(e, engine.SendMessage):
                sends.append(e)
        return sends

    def _expire_dictation(self, upto: int) -> None:
        deadline = engine.dictation_deadline(self.state)
        while deadline is not None and deadline <= upto:
            self.state, effects = engine.tick(self.state, deadline)
            self._record(deadline, effects)
            deadline = engine.dictation_deadline(self.state)

    async def run(self, host: str, port: int) -> int:
        reader, writer = await asyncio.open_connection(host, port)
        writer.write(encode_frame(WireFrame(type="hello", from_=self.name)))
        await writer.drain()

        inbox: asyncio.Queue[WireFrame] = asyncio.Queue()

        async def pump() -> None:
            while True:
                line = await reader.readline()
                if not line:
                    return
                try:
                    frame = decode_frame(line)
                except FrameError:
                    continue
                await inbox.put(frame)

        pump_task = asyncio.create_task(pump())
        try:
            for ev in self.trace.events:
                await self._advance_to(ev.t_ms, inbox, writer)
                if ev.kind == "incoming":
                    self.skipped_incoming += 1  # live incoming comes from bots
                    continue
                now = max(ev.t_ms, self.state.last_event_ms)
                if ev.kind == "keyboard_text":
                    text = ev.payload.get("text", "")
                    self.records.append({"t": now, "effect": "keyboard_text",
                                         "data": {"chars": len(text)}})
                self.state, effects = engine.apply_event(
                    self.state, ev.kind, ev.payload, now
                )
                for send in self._record(now, effects):
                    writer.write(encode_frame(WireFrame(
                        type="msg", from_=self.name,
                        to=send.message.recipient, body=send.message.body,
                    )))
                    await writer.drain()
            # Drain window: let scheduled bot replies arrive.
            deadline = time.monotonic() + self.drain_ms / 1000.0
            while time.monotonic() < deadline:
                timeout = deadline - time.monotonic()
                try:
                    frame = await asyncio.wait_for(inbox.get(), timeout=timeout)
                except asyncio.TimeoutError:
                    break
                self._handle_frame(frame)
        finally:
            pump_task.cancel()
            writer.close()
        return EXIT_OK

    async def _advance_to(self, t_ms: int, inbox: asyncio.Queue, writer) -> None:
        """Wait (scaled real time) until the trace clock reaches t_ms,
        processing server frames and dictation expiry as they come due."""
        while True:
            while not inbox.empty():
                self._handle_frame(inbox.get_nowait())
            deadline = engine.dictation_deadline(self.state)
            now = self.session_now()
            next_stop = t_ms if deadline is None else min(t_ms, deadline)
            if now >= next_stop:
                if deadline is not None and deadline <= now:
                    self._expire_dictation(deadline)
                    continue
                return
            wait_real = (next_stop - now) * self.time_scale / 1000.0
            try:
                frame = await asyncio.wait_for(
                    inbox.get(), timeout=min(wait_real, 0.05)
                )
                self._handle_frame(frame)
            except asyncio.TimeoutError:
                pass

    def _handle_frame(self, frame: WireFrame) -> None:
        if frame.type != "msg":
            return
        now = self.session_now()
        self._expire_dictation(now)
        msg = Message(id=frame.id, sender=frame.from_, recipient="self",
                      body=frame.body, ts_ms=now)
        self.state, effects = engine.handle_incoming(self.state, msg, now)
        self._record(now, effects)


def _cmd_client(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config, vars(args))
    except (OSError, ValueError) as e:
        print(f"error: bad config: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        trace = metrics.load_trace(args.trace)
    except (OSError, metrics.TraceError) as e:
        print(f"error: bad trace: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.silence_gap_ms is not None:
        trace.header.silence_gap_ms = args.silence_gap_ms
    client = _LiveClient(trace, args.name, args.time_scale, args.drain_ms)
    try:
        code = asyncio.run(client.run(cfg.host, cfg.port))
    except (ConnectionRefusedError, OSError) as e:
        print(f"error: cannot reach server: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if client.skipped_incoming:
        print(f"warning: skipped {client.skipped_incoming} trace 'incoming' event(s); "
              "live runs take incoming messages from the server", file=sys.stderr)
    report = metrics.build_report(client.records, trace.header.references)
    result = metrics.ReplayResult(final_state=client.state,
                                  records=client.records, report=report)
    _write_outputs(result, args)
    return code


def _cmd_bots_check(args: argparse.Namespace) -> int:
    try:
        scripts = load_bot_scripts(args.bots_path)
    except (OSError, json.JSONDecodeError, BotScriptError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    for s in scripts:
        print(f"{s.name}: {len(s.rules)} rule(s), seed {s.rng_seed}")
    print(f"ok: {len(scripts)} bot(s)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "replay":
        return _cmd_replay(args)
    if args.command == "client":
        return _cmd_client(args)
    if args.command == "bots-check":
        return _cmd_bots_check(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
