"""Deterministic trace replay and the text-entry measures it yields.

Builds the canonical five-step trace, replays it twice to show the effect
logs are byte-identical, and walks through the three measures: response
time, entry speed (5-char-word WPM), and the normalized edit-distance
error rate.

Run:  python3 demos/04_replay_metrics.py
"""

from fractions import Fraction

from hudchat.metrics import (
    InputTrace,
    TraceEvent,
    TraceHeader,
    entry_speed,
    error_rate,
    format_report_table,
    replay,
    response_time,
)

trace = InputTrace(
    header=TraceHeader(session_id="demo", silence_gap_ms=2000,
                       references=["ok see you at five"]),
    events=[
        TraceEvent(1000, "incoming", {"sender": "Peter",
                                      "body": "are we still on for 5pm?"}),
        TraceEvent(2000, "utterance", {"text": "show chat"}),
        TraceEvent(3000, "utterance", {"text": "Peter"}),
        TraceEvent(4000, "utterance", {"text": "voice message"}),
        TraceEvent(5000, "utterance", {"text": "ok see you at five"}),
        TraceEvent(8000, "utterance", {"text": "send"}),
        TraceEvent(9000, "utterance", {"text": "hide chat"}),
    ],
)

result = replay(trace)
print("effect log:")
for record in result.records:
    print(f"  t={record['t']:<6} {record['effect']:24} {record['data']}")

print()
print(f"replay is bit-reproducible: "
      f"{replay(trace).effect_log_bytes() == result.effect_log_bytes()}")

print()
print("report:")
print(format_report_table(result.report))

print()
print("== the measures, piece by piece ==")
durations, unanswered = response_time(result.records)
print(f"response_time: notification at t=1000, answered at t=8000 -> {durations}")

wpm = entry_speed(result.records)
print(f"entry_speed: {len('ok see you at five')} chars over 4000 ms "
      f"-> {wpm} wpm ({float(wpm):.1f})")

for produced, reference in [("hello world", "hello world"),
                            ("helo wrld", "hello world")]:
    r = error_rate(produced, reference)
    print(f"error_rate({produced!r}, {reference!r}) = {r} ({float(r):.4f})")

assert error_rate("helo wrld", "hello world") == Fraction(2, 11)
