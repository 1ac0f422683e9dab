"""Newline-delimited JSON frame codec for the chat protocol.

Every frame is one UTF-8 JSON object per line. The server rejects inbound
lines over MAX_FRAME_BYTES with an "frame_too_large" error; unknown JSON
keys are ignored on read so the vocabulary can grow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 64 * 1024

# "event" and "render" only travel on the browser socket bridge.
FRAME_TYPES = (
    "hello",
    "hello_ack",
    "msg",
    "ack",
    "notify",
    "history_req",
    "history",
    "err",
    "event",
    "render",
)


class FrameError(Exception):
    """Raised by the codec; `code` becomes the body of an err frame."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


@dataclass(frozen=True)
class WireFrame:
    type: str
    id: str = ""
    from_: str = ""
    to: str = ""
    body: str = ""
    ts: int = 0
    seq: int = 0
    v: int = PROTOCOL_VERSION


def frame_dict(f: WireFrame) -> dict:
    return {
        "v": f.v,
        "type": f.type,
        "id": f.id,
        "from": f.from_,
        "to": f.to,
        "body": f.body,
        "ts": f.ts,
        "seq": f.seq,
    }


def encode_frame(f: WireFrame) -> bytes:
    """Serialize to exactly one newline-terminated line of UTF-8 JSON."""
    return (
        json.dumps(frame_dict(f), ensure_ascii=False, separators=(",", ":")) + "\n"
    ).encode("utf-8")


def _string(obj: dict, key: str) -> str:
    value = obj.get(key, "")
    if not isinstance(value, str):
        raise FrameError("bad_frame", f"field {key!r} must be a string")
    return value


def _integer(obj: dict, key: str) -> int:
    value = obj.get(key, 0)
    if isinstance(value, bool) or not isinstance(value, int):
        raise FrameError("bad_frame", f"field {key!r} must be an integer")
    return value


def decode_frame(line: bytes | str) -> WireFrame:
    """Parse one line into a frame.

    Raises FrameError("frame_too_large") over the size cap and
    FrameError("bad_frame") for anything else unusable: invalid UTF-8 or
    JSON, a non-object, a missing or wrong version, or an unknown type.
    """
    raw = line.encode("utf-8") if isinstance(line, str) else line
    if len(raw) > MAX_FRAME_BYTES:
        raise FrameError("frame_too_large")
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError("bad_frame", str(e)) from e
    if not isinstance(obj, dict):
        raise FrameError("bad_frame", "frame is not a JSON object")
    if obj.get("v") != PROTOCOL_VERSION:
        raise FrameError("bad_frame", "missing or unsupported protocol version")
    ftype = _string(obj, "type")
    if ftype not in FRAME_TYPES:
        raise FrameError("bad_frame", f"unknown frame type {ftype!r}")
    return WireFrame(
        type=ftype,
        id=_string(obj, "id"),
        from_=_string(obj, "from"),
        to=_string(obj, "to"),
        body=_string(obj, "body"),
        ts=_integer(obj, "ts"),
        seq=_integer(obj, "seq"),
        v=PROTOCOL_VERSION,
    )
