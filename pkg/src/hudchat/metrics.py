"""Replayable input traces and the derived text-entry measures.

A trace is JSONL: a header line, then timestamped events. Replay feeds the
events through a fresh session engine with a fully deterministic clock:
dictation auto-stop fires at exactly last_speech + silence_gap even when
the trace carries no tick at that instant.

Speed and accuracy follow the standard text-entry definitions: words per
minute with a five-character word, and edit distance normalized by the
longer string (minimum string distance error rate).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import engine
from .engine import EngineConfig, SessionState

EVENT_KINDS = ("utterance", "ring", "gesture", "keyboard_text", "incoming", "tick")

# Effect-log names that open a composition span.
_COMPOSITION_MARKERS = ("start_dictation_feedback", "keyboard_text")


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    t_ms: int
    kind: str
    payload: dict


@dataclass
class TraceHeader:
    session_id: str = "session"
    silence_gap_ms: int = 2000
    seed: int = 0
    contacts: list[str] = field(default_factory=list)
    references: list[str] = field(default_factory=list)


@dataclass
class InputTrace:
    header: TraceHeader
    events: list[TraceEvent]


def parse_trace(text: str) -> InputTrace:
    """Parse a JSONL trace document; the header line precedes all events."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceError("empty trace file")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise TraceError(f"header line is not JSON: {e}") from e
    if not isinstance(head, dict) or "session_id" not in head:
        raise TraceError("first line must be a header object with session_id")
    header = TraceHeader(
        session_id=str(head["session_id"]),
        silence_gap_ms=int(head.get("silence_gap_ms", 2000)),
        seed=int(head.get("seed", 0)),
        contacts=[str(c) for c in head.get("contacts", [])],
        references=[str(r) for r in head.get("references", [])],
    )
    events = []
    for i, line in enumerate(lines[1:], start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(f"event line {i} is not JSON: {e}") from e
        if not isinstance(obj, dict):
            raise TraceError(f"event line {i} is not an object")
        kind = obj.get("kind")
        if kind not in EVENT_KINDS:
            raise TraceError(f"event line {i}: unknown kind {kind!r}")
        t = obj.get("t")
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise TraceError(f"event line {i}: t must be a non-negative integer")
        payload = {k: v for k, v in obj.items() if k not in ("t", "kind")}
        events.append(TraceEvent(t_ms=t, kind=kind, payload=payload))
    return InputTrace(header=header, events=events)


def load_trace(path: str | Path) -> InputTrace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def trace_to_jsonl(trace: InputTrace) -> str:
    head = {
        "session_id": trace.header.session_id,
        "silence_gap_ms": trace.header.silence_gap_ms,
        "seed": trace.header.seed,
    }
    if trace.header.contacts:
        head["contacts"] = trace.header.contacts
    if trace.header.references:
        head["references"] = trace.header.references
    lines = [json.dumps(head, ensure_ascii=False)]
    for ev in trace.events:
        lines.append(json.dumps({"t": ev.t_ms, "kind": ev.kind, **ev.payload},
                                ensure_ascii=False))
    return "\n".join(lines) + "\n"


# --- metrics -------------------------------------------------------------


@dataclass
class MetricsReport:
    response_times_ms: list[int]
    unanswered_notifications: int
    entry_speed_wpm: Fraction | None
    error_rate: Fraction
    messages_sent: int

    def to_dict(self) -> dict:
        return {
            "response_times_ms": list(self.response_times_ms),
            "unanswered_notifications": self.unanswered_notifications,
            "entry_speed_wpm": (
                None if self.entry_speed_wpm is None else float(self.entry_speed_wpm)
            ),
            "error_rate": float(self.error_rate),
            "messages_sent": self.messages_sent,
        }


def response_time(records: list[dict]) -> tuple[list[int], int]:
    """Notification-to-answer durations, earliest-pending-first per sender.

    Each send consumes the oldest pending notification from its recipient;
    notifications never answered are excluded and counted separately.
    """
    pending: dict[str, list[int]] = {}
    durations: list[int] = []
    for r in records:
        if r["effect"] == "show_notification":
            pending.setdefault(r["data"]["sender"], []).append(r["t"])
        elif r["effect"] == "send_message":
            queue = pending.get(r["data"]["to"])
            if queue:
                durations.append(r["t"] - queue.pop(0))
    unanswered = sum(len(q) for q in pending.values())
    return durations, unanswered


def entry_speed(records: list[dict]) -> Fraction | None:
    """Words per minute over all sent messages, one word per five characters.

    A message's composition spans the first marker after the previous send
    (dictation feedback or typed text) to its send. Messages without a
    marker, and a total composition time of zero, yield no measurement.
    """
    chars = 0
    total_ms = 0
    start: int | None = None
    for r in records:
        if r["effect"] in _COMPOSITION_MARKERS:
            if start is None:
                start = r["t"]
        elif r["effect"] == "send_message":
            if start is not None:
                chars += len(r["data"]["body"])
                total_ms += r["t"] - start
                start = None
    if chars == 0 or total_ms <= 0:
        return None
    # (chars/5 words) / (ms/60000 minutes)
    return Fraction(chars * 12000, total_ms)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, unit costs, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(
                prev[j] + 1,  # delete from a
                cur[j - 1] + 1,  # insert into a
                prev[j - 1] + (ca != cb),  # substitute
            ))
        prev = cur
    return prev[-1]


def error_rate(produced: str, reference: str) -> Fraction:
    """Edit distance normalized by the longer string; 0 for a perfect match."""
    if not reference:
        raise ValueError("reference text must be non-empty")
    return Fraction(edit_distance(produced, reference),
                    max(len(produced), len(reference)))


def build_report(records: list[dict], references: list[str] | None = None) -> MetricsReport:
    durations, unanswered = response_time(records)
    sent = [r["data"]["body"] for r in records if r["effect"] == "send_message"]
    rate = Fraction(0)
    refs = references or []
    pairs = list(zip(sent, refs))
    if pairs:
        rate = sum(
            (error_rate(p, ref) for p, ref in pairs), start=Fraction(0)
        ) / len(pairs)
    return MetricsReport(
        response_times_ms=durations,
        unanswered_notifications=unanswered,
        entry_speed_wpm=entry_speed(records),
        error_rate=rate,
        messages_sent=len(sent),
    )


# --- replay --------------------------------------------------------------


@dataclass
class ReplayResult:
    final_state: SessionState
    records: list[dict]
    report: MetricsReport

    def effect_log_bytes(self) -> bytes:
        return engine.encode_effect_log(self.records)


def _expire_dictation(state: SessionState, upto_ms: int, records: list[dict]) -> SessionState:
    deadline = engine.dictation_deadline(state)
    while deadline is not None and deadline <= upto_ms:
        state, effects = engine.tick(state, deadline)
        records += [engine.effect_record(deadline, e) for e in effects]
        deadline = engine.dictation_deadline(state)
    return state


def replay(trace: InputTrace) -> ReplayResult:
    """Feed a trace through a fresh session; deterministic end to end.

    Rejects out-of-order timestamps with the offending event index.
    """
    config = EngineConfig(silence_gap_ms=trace.header.silence_gap_ms)
    state = engine.initial_state(trace.header.contacts, config)
    records: list[dict] = []
    prev_t = 0
    for i, ev in enumerate(trace.events):
        if ev.t_ms < prev_t:
            raise TraceError(f"event {i} out of order: t={ev.t_ms} after t={prev_t}")
        prev_t = ev.t_ms
        state = _expire_dictation(state, ev.t_ms, records)
        if ev.kind == "keyboard_text":
            text = ev.payload.get("text", "")
            records.append({"t": ev.t_ms, "effect": "keyboard_text",
                            "data": {"chars": len(text)}})
        state, effects = engine.apply_event(state, ev.kind, ev.payload, ev.t_ms)
        records += [engine.effect_record(ev.t_ms, e) for e in effects]
    report = build_report(records, trace.header.references)
    return ReplayResult(final_state=state, records=records, report=report)


def format_report_table(report: MetricsReport) -> str:
    """Small fixed-width table for terminal output."""
    rt = report.response_times_ms
    mean_rt = f"{sum(rt) / len(rt):.0f} ms" if rt else "-"
    wpm = f"{float(report.entry_speed_wpm):.2f}" if report.entry_speed_wpm is not None else "-"
    rows = [
        ("messages sent", str(report.messages_sent)),
        ("response times", ", ".join(str(d) for d in rt) if rt else "-"),
        ("mean response time", mean_rt),
        ("unanswered notifications", str(report.unanswered_notifications)),
        ("entry speed (wpm)", wpm),
        ("error rate", f"{float(report.error_rate):.4f}"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
