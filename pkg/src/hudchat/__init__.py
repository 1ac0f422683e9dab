"""Heads-up messaging for glasses-style displays.

A chat server with scripted conversation partners, a deterministic
multimodal session engine (voice commands, dictation, ring mouse, mid-air
gestures), and a replay/metrics harness for text-entry studies.
"""

from .engine import (
    EngineConfig,
    Message,
    RenderModel,
    SessionState,
    handle_command,
    handle_incoming,
    initial_state,
    render,
    tick,
)
from .grammar import (
    Command,
    GestureEvent,
    Mode,
    RingEvent,
    Utterance,
    map_gesture_event,
    map_ring_event,
    parse_utterance,
)
from .metrics import (
    InputTrace,
    MetricsReport,
    entry_speed,
    error_rate,
    load_trace,
    replay,
    response_time,
)
from .wire import WireFrame, decode_frame, encode_frame

__version__ = "0.1.0"

__all__ = [
    "Command",
    "EngineConfig",
    "GestureEvent",
    "InputTrace",
    "Message",
    "MetricsReport",
    "Mode",
    "RenderModel",
    "RingEvent",
    "SessionState",
    "Utterance",
    "WireFrame",
    "decode_frame",
    "encode_frame",
    "entry_speed",
    "error_rate",
    "handle_command",
    "handle_incoming",
    "initial_state",
    "load_trace",
    "map_gesture_event",
    "map_ring_event",
    "parse_utterance",
    "render",
    "replay",
    "response_time",
    "tick",
]
