"""The five-step messaging flow, stepped through the session engine by hand.

A message arrives while the overlay is hidden; the user reveals the chat,
answers by voice, and hides the overlay again. Every step prints the
effects and what the four panels would show.

Run:  python3 demos/02_session_walkthrough.py
"""

from hudchat import engine
from hudchat.engine import Message, initial_state, render
from hudchat.grammar import Mode, Utterance, parse_utterance


def show(state, label):
    rm = render(state)
    print(f"  [{label}] visible={rm.visible} mode={rm.input_panel.mode} "
          f"draft={rm.input_panel.draft!r}")
    for n in rm.notification_panel:
        print(f"      notification: {n.sender} at t={n.arrived_ms}: {n.preview!r}")
    for m in rm.chat_panel:
        print(f"      chat: {m.sender}: {m.body!r}")


def say(state, text, t):
    mode = Mode.DICTATION if state.dictating else Mode.COMMAND
    cmd = parse_utterance(Utterance(text=text), mode,
                          [c.name for c in state.contacts])
    state, effects = engine.handle_command(state, cmd, t)
    names = ", ".join(type(e).__name__ for e in effects) or "none"
    print(f"t={t}: say {text!r} -> {cmd.kind}  (effects: {names})")
    return state


state = initial_state(["Peter"])

print("t=1000: a message from Peter arrives while the overlay is hidden")
msg = Message(id="in~Peter-1", sender="Peter", recipient="self",
              body="are we still on for 5pm?", ts_ms=1000)
state, effects = engine.handle_incoming(state, msg, 1000)
print("  effects:", ", ".join(type(e).__name__ for e in effects))
show(state, "hidden, notification pending")

print()
state = say(state, "show chat", 2000)
show(state, "step 1: interface revealed")

print()
state = say(state, "Peter", 3000)
show(state, "step 2: chat focused")

print()
state = say(state, "voice message", 4000)
state = say(state, "ok see you at five", 5000)
show(state, "step 3: dictation in progress")

gap = state.config.silence_gap_ms
deadline = engine.dictation_deadline(state)
print(f"\n...silence; dictation auto-stops {gap} ms after the last words")
state, effects = engine.tick(state, deadline)
print(f"t={deadline}: tick -> effects:",
      ", ".join(type(e).__name__ for e in effects))
show(state, "dictation ended, draft retained")

print()
state = say(state, "send", 8000)
show(state, "step 4: message sent")

print()
state = say(state, "hide chat", 9000)
show(state, "step 5: overlay hidden, full view of the world restored")

print()
print("history with Peter:")
for m in state.history["Peter"]:
    print(f"  {m.sender:>5}: {m.body}")
