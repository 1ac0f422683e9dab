"""Tour of the input grammar: every supported interaction, all three modalities.

Run:  python3 demos/01_command_grammar.py
"""

from hudchat.grammar import (
    GestureEvent,
    Mode,
    RingEvent,
    Utterance,
    map_gesture_event,
    map_ring_event,
    parse_utterance,
)

contacts = ["Peter", "Mary"]

print("== voice commands (command mode) ==")
for text in ["show chat", "hide chat", "open notification", "Peter",
             "voice message", "send", "open keyboard", "close keyboard",
             "scroll to the top", "scroll up", "scroll down", "reply",
             "text Mary"]:
    cmd = parse_utterance(Utterance(text=text), Mode.COMMAND, contacts)
    print(f"  {text!r:22} -> {cmd.kind}" + (f"({cmd.arg})" if cmd.arg else ""))

print()
print("== the same recognizer is case-blind and whitespace-tolerant ==")
for text in ["  SHOW CHAT ", "TEXT peter", "pEtEr"]:
    cmd = parse_utterance(Utterance(text=text), Mode.COMMAND, contacts)
    print(f"  {text!r:22} -> {cmd.kind}" + (f"({cmd.arg})" if cmd.arg else ""))

print()
print("== dictation mode: everything becomes message text ==")
for text in ["show chat", "see you at five"]:
    cmd = parse_utterance(Utterance(text=text), Mode.DICTATION, contacts)
    print(f"  {text!r:22} -> {cmd.kind}({cmd.arg!r})")

print()
print("== unrecognized speech never fails, it just does nothing ==")
for text in ["", "um hello??", "\U0001F600\U0001F680"]:
    cmd = parse_utterance(Utterance(text=text), Mode.COMMAND, contacts)
    print(f"  {text!r:22} -> {cmd.kind}")

print()
print("== ring mouse ==")
ring_cases = [
    (RingEvent("center", "hold", 1200), False, False, "long press reveals"),
    (RingEvent("center", "hold", 1200), True, False, "long press hides"),
    (RingEvent("up", "click"), True, False, "click scrolls"),
    (RingEvent("up", "hold", 1500), True, False, "hold jumps to top"),
    (RingEvent("right", "click"), True, False, "cycle input focus"),
    (RingEvent("center", "click"), True, False, "activate focused button"),
    (RingEvent("down", "click"), True, True, "any click closes keyboard"),
]
for event, visible, keyboard_open, note in ring_cases:
    cmd = map_ring_event(event, visible, keyboard_open)
    print(f"  {event.button}/{event.kind:5} (visible={visible}, kb={keyboard_open})"
          f" -> {cmd.kind:18} # {note}")

print()
print("== mid-air gestures ==")
gesture_cases = [
    (GestureEvent("press", "notification", "3"), False),
    (GestureEvent("press", "contact", "Peter"), False),
    (GestureEvent("press", "voice_button"), False),
    (GestureEvent("press", "send_button"), False),
    (GestureEvent("press", "anywhere"), True),
    (GestureEvent("swipe_up"), False),
    (GestureEvent("swipe_down"), False),
]
for event, keyboard_open in gesture_cases:
    cmd = map_gesture_event(event, keyboard_open)
    target = f"{event.kind}:{event.target}" if event.kind == "press" else event.kind
    print(f"  {target:22} (kb={keyboard_open}) -> {cmd.kind}"
          + (f"({cmd.arg})" if cmd.arg else ""))
