"""Session engine: command semantics, incoming flow, clock, rendering."""

import json
import random

import pytest

from hudchat import engine, grammar
from hudchat.engine import (
    Beep,
    EngineConfig,
    ErrorEffect,
    Message,
    OpacityBoost,
    SendMessage,
    ShowNotification,
    StartDictationFeedback,
    StopDictationFeedback,
    handle_command,
    handle_incoming,
    initial_state,
    render,
    tick,
)
from hudchat.grammar import Command

from support import random_reachable_state, step_random


def cmd(kind, arg=None):
    return Command(kind, arg)


def visible_state(contacts=("Peter", "Bob")):
    s = initial_state(list(contacts))
    s, _ = handle_command(s, cmd(grammar.REVEAL_INTERFACE), 1000)
    return s


def incoming(s, sender, body, t, id=None):
    n = len(s.history.get(sender, ())) + 1
    msg = Message(id=id or f"in~{sender}-{n}", sender=sender, recipient="self",
                  body=body, ts_ms=t)
    return handle_incoming(s, msg, t)


def errors_of(effects):
    return [e.code for e in effects if isinstance(e, ErrorEffect)]


# --- visibility ---------------------------------------------------------


def test_reveal_from_hidden():
    s = initial_state(["Peter"])
    s2, effects = handle_command(s, cmd(grammar.REVEAL_INTERFACE), 5000)
    assert s2.visible and effects == []


def test_hidden_rejects_everything_but_reveal():
    s = initial_state(["Peter"])
    for kind in (grammar.HIDE_INTERFACE, grammar.SEND, grammar.SCROLL_UP,
                 grammar.OPEN_NOTIFICATION, grammar.START_DICTATION,
                 grammar.APPEND_TRANSCRIPT, grammar.REPLY):
        s2, effects = handle_command(s, cmd(kind, "x"), 10)
        assert s2 == s
        assert errors_of(effects) == ["hidden"]


def test_no_command_is_a_noop_everywhere():
    for s in (initial_state(["Peter"]), visible_state()):
        s2, effects = handle_command(s, cmd(grammar.NO_COMMAND), 2000)
        assert s2 == s and effects == []


def test_hide_reveal_round_trip_preserves_conversation_state():
    s = visible_state()
    s, _ = incoming(s, "Bob", "lunch?", 2000)
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 3000)
    s, _ = handle_command(s, cmd(grammar.APPEND_TRANSCRIPT, "on my way"), 3500)
    hidden, _ = handle_command(s, cmd(grammar.HIDE_INTERFACE), 4000)
    assert not hidden.visible
    back, _ = handle_command(hidden, cmd(grammar.REVEAL_INTERFACE), 5000)
    assert back.visible
    assert back.focused_contact == s.focused_contact
    assert back.draft == s.draft == "on my way"
    assert back.history == s.history
    assert back.notifications == s.notifications
    assert back.contacts == s.contacts
    assert back.keyboard_open == s.keyboard_open


def test_hide_stops_active_dictation():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s, _ = handle_command(s, cmd(grammar.START_DICTATION), 2500)
    s2, effects = handle_command(s, cmd(grammar.HIDE_INTERFACE), 3000)
    assert not s2.visible and not s2.dictating
    assert effects == [StopDictationFeedback()]


# --- contacts, notifications, focus --------------------------------------


def test_select_contact_clears_unread():
    s = initial_state(["Peter"])
    s, _ = incoming(s, "Peter", "hi", 100)
    assert s.contacts[0].unread_count == 1
    s, _ = handle_command(s, cmd(grammar.REVEAL_INTERFACE), 200)
    s, effects = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 300)
    assert effects == []
    assert s.focused_contact == "Peter"
    assert s.contacts[0].unread_count == 0


def test_select_unknown_contact():
    s = visible_state()
    s2, effects = handle_command(s, cmd(grammar.SELECT_CONTACT, "Nobody"), 2000)
    assert s2 == s and errors_of(effects) == ["unknown_contact"]


def test_open_notification_pops_newest():
    s = initial_state(["Peter", "Bob"])
    s, _ = incoming(s, "Peter", "one", 100)
    s, _ = incoming(s, "Bob", "two", 200)
    s, _ = handle_command(s, cmd(grammar.REVEAL_INTERFACE), 300)
    s, effects = handle_command(s, cmd(grammar.OPEN_NOTIFICATION), 400)
    assert effects == []
    assert s.focused_contact == "Bob"  # newest first
    assert [n.sender for n in s.notifications] == ["Peter"]


def test_open_notification_empty():
    s = visible_state()
    s2, effects = handle_command(s, cmd(grammar.OPEN_NOTIFICATION), 2000)
    assert s2 == s and errors_of(effects) == ["no_notification"]


# --- dictation & draft ----------------------------------------------------


def test_dictation_flow_and_silence_gap():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s, effects = handle_command(s, cmd(grammar.START_DICTATION), 3000)
    assert effects == [StartDictationFeedback()]
    assert s.dictating and s.last_speech_ms == 3000
    s, _ = handle_command(s, cmd(grammar.APPEND_TRANSCRIPT, "ok"), 4000)
    s, _ = handle_command(s, cmd(grammar.APPEND_TRANSCRIPT, "see you"), 4500)
    assert s.draft == "ok see you"
    # below the gap: nothing happens
    s2, effects = tick(s, 5500)
    assert s2.dictating and effects == []
    # at/after the gap: auto-stop, draft retained
    s3, effects = tick(s2, 6500)
    assert not s3.dictating
    assert effects == [StopDictationFeedback()]
    assert s3.draft == "ok see you"


def test_start_dictation_without_focus():
    s = visible_state()
    s2, effects = handle_command(s, cmd(grammar.START_DICTATION), 2000)
    assert s2 == s and errors_of(effects) == ["no_contact"]


def test_dictation_and_keyboard_are_mutually_exclusive():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s, _ = handle_command(s, cmd(grammar.START_DICTATION), 2500)
    s, effects = handle_command(s, cmd(grammar.OPEN_KEYBOARD), 3000)
    assert s.keyboard_open and not s.dictating
    assert effects == [StopDictationFeedback()]
    s, effects = handle_command(s, cmd(grammar.START_DICTATION), 3500)
    assert s.dictating and not s.keyboard_open
    assert effects == [StartDictationFeedback()]


def test_send_flow():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s, _ = handle_command(s, cmd(grammar.APPEND_TRANSCRIPT, "ok see you"), 3000)
    s, effects = handle_command(s, cmd(grammar.SEND), 9000)
    assert len(effects) == 1 and isinstance(effects[0], SendMessage)
    sent = effects[0].message
    assert sent.recipient == "Peter" and sent.body == "ok see you"
    assert sent.sender == "self" and sent.ts_ms == 9000
    assert s.draft == ""
    assert s.history["Peter"][-1] == sent
    assert s.contacts[0].name == "Peter"  # sending is activity


def test_send_empty_draft():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s2, effects = handle_command(s, cmd(grammar.SEND), 9000)
    assert s2 == s and errors_of(effects) == ["empty_draft"]


# --- composites ----------------------------------------------------------


def test_reply_expands_atomically():
    s = initial_state(["Bob"])
    s, _ = incoming(s, "Bob", "where are you", 1000)
    s, _ = handle_command(s, cmd(grammar.REVEAL_INTERFACE), 2000)
    s2, effects = handle_command(s, cmd(grammar.REPLY), 7000)
    assert s2.focused_contact == "Bob"
    assert s2.notifications == []
    assert s2.dictating
    assert effects == [StartDictationFeedback()]


def test_reply_without_notification_aborts():
    s = visible_state()
    s2, effects = handle_command(s, cmd(grammar.REPLY), 3000)
    assert s2 == s
    assert errors_of(effects) == ["no_notification"]
    assert not s2.dictating


def test_text_to_expands_and_aborts():
    s = visible_state()
    s2, effects = handle_command(s, cmd(grammar.TEXT_TO, "Peter"), 3000)
    assert s2.focused_contact == "Peter" and s2.dictating
    assert effects == [StartDictationFeedback()]
    s3, effects = handle_command(s, cmd(grammar.TEXT_TO, "Nobody"), 3000)
    assert s3 == s and errors_of(effects) == ["unknown_contact"]


def test_focus_cycle_and_activate():
    s = visible_state()
    assert s.input_focus == "voice"
    s, _ = handle_command(s, cmd(grammar.FOCUS_NEXT), 2000)
    assert s.input_focus == "keyboard"
    s, effects = handle_command(s, cmd(grammar.ACTIVATE_FOCUSED), 2100)
    assert s.keyboard_open and effects == []
    s, _ = handle_command(s, cmd(grammar.CLOSE_KEYBOARD), 2200)
    s, _ = handle_command(s, cmd(grammar.FOCUS_NEXT), 2300)
    assert s.input_focus == "send"
    s2, effects = handle_command(s, cmd(grammar.ACTIVATE_FOCUSED), 2400)
    assert errors_of(effects) == ["empty_draft"]
    s, _ = handle_command(s, cmd(grammar.FOCUS_NEXT), 2500)
    assert s.input_focus == "voice"


# --- incoming ------------------------------------------------------------


def test_incoming_while_hidden_notifies():
    s = initial_state(["Bob"])
    s, effects = incoming(s, "Bob", "you around?", 2000)
    assert [type(e) for e in effects] == [ShowNotification, Beep, OpacityBoost]
    notif = effects[0].notification
    assert notif.sender == "Bob" and notif.arrived_ms == 2000
    assert s.notifications[0] == notif
    assert s.contacts[0].unread_count == 1
    assert s.opacity_boost["Bob"] == 2000 + s.config.boost_duration_ms


def test_incoming_to_focused_visible_chat_suppresses_notification():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Bob"), 2000)
    s, effects = incoming(s, "Bob", "here", 3000)
    assert [type(e) for e in effects] == [Beep, OpacityBoost]
    assert s.notifications == []
    assert next(c for c in s.contacts if c.name == "Bob").unread_count == 0
    assert s.history["Bob"][-1].body == "here"


def test_incoming_to_unfocused_chat_notifies_even_when_visible():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    s, effects = incoming(s, "Bob", "ping", 3000)
    assert [type(e) for e in effects] == [ShowNotification, Beep, OpacityBoost]


def test_notification_eviction_keeps_three_newest():
    s = initial_state(["Bob"])
    for i, t in enumerate((100, 200, 300, 400)):
        s, _ = incoming(s, "Bob", f"m{i}", t)
    assert len(s.notifications) == 3
    assert [n.preview for n in s.notifications] == ["m3", "m2", "m1"]


def test_unknown_sender_auto_added_on_top():
    s = initial_state(["Peter"])
    s, _ = incoming(s, "Stranger", "hello", 500)
    assert s.contacts[0].name == "Stranger"
    assert [c.name for c in s.contacts] == ["Stranger", "Peter"]


def test_boost_expires_on_tick():
    s = initial_state(["Bob"])
    s, _ = incoming(s, "Bob", "x", 1000)
    until = s.opacity_boost["Bob"]
    s2, _ = tick(s, until - 1)
    assert "Bob" in s2.opacity_boost
    assert engine.boosted_contacts(s2, until - 1) == {"Bob"}
    s3, _ = tick(s2, until)
    assert "Bob" not in s3.opacity_boost


# --- clock ---------------------------------------------------------------


def test_clock_never_goes_backwards():
    s = visible_state()
    s, _ = handle_command(s, cmd(grammar.SCROLL_DOWN), 5000)
    with pytest.raises(ValueError):
        tick(s, 4999)
    with pytest.raises(ValueError):
        handle_command(s, cmd(grammar.SCROLL_UP), 10)
    with pytest.raises(ValueError):
        incoming(s, "Bob", "late", 10)


# --- scrolling -----------------------------------------------------------


def test_scroll_bounds():
    s = visible_state(("a", "b", "c", "d", "e"))
    assert s.scroll_offset == 0
    s, _ = handle_command(s, cmd(grammar.SCROLL_UP), 2000)
    assert s.scroll_offset == 0
    for t in (2100, 2200, 2300, 2400, 2500):
        s, _ = handle_command(s, cmd(grammar.SCROLL_DOWN), t)
    assert s.scroll_offset == 2  # window of 3 over 5 contacts
    assert s.scroll_offset < len(s.contacts)
    s, _ = handle_command(s, cmd(grammar.SCROLL_TO_TOP), 2600)
    assert s.scroll_offset == 0


# --- render ---------------------------------------------------------------


def test_render_windows_last_three_messages():
    s = visible_state()
    for i, t in enumerate((100, 200, 300, 400, 500), start=1):
        s, _ = incoming(s, "Peter", f"m{i}", 1000 + t)
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    rm = render(s)
    assert [m.body for m in rm.chat_panel] == ["m3", "m4", "m5"]
    assert rm.canvas == (2048, 1080)


def test_render_short_history():
    s = visible_state()
    s, _ = incoming(s, "Peter", "a", 1500)
    s, _ = incoming(s, "Peter", "b", 1600)
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2000)
    assert len(render(s).chat_panel) == 2


def test_render_hidden_is_empty():
    s = initial_state(["Peter"])
    s, _ = incoming(s, "Peter", "hi", 100)
    rm = render(s)
    assert not rm.visible
    assert rm.notification_panel == [] and rm.chat_panel == [] and rm.contact_panel == []
    assert rm.input_panel.draft == ""


def test_render_contact_window_follows_scroll():
    s = visible_state(("a", "b", "c", "d"))
    s, _ = handle_command(s, cmd(grammar.SCROLL_DOWN), 2000)
    rm = render(s)
    assert [c.name for c in rm.contact_panel] == ["b", "c", "d"]


def test_render_input_panel_modes():
    s = visible_state()
    assert render(s).input_panel.mode == "idle"
    s, _ = handle_command(s, cmd(grammar.OPEN_KEYBOARD), 2000)
    assert render(s).input_panel.mode == "keyboard"
    s, _ = handle_command(s, cmd(grammar.SELECT_CONTACT, "Peter"), 2100)
    s, _ = handle_command(s, cmd(grammar.START_DICTATION), 2200)
    assert render(s).input_panel.mode == "dictation"


# --- raw event stepping ------------------------------------------------------


def test_apply_event_payload_schema():
    s = initial_state(["Peter"])
    # ring: click/hold rides under "press"; the outer "kind" names the event
    s, _ = engine.apply_event(
        s, "ring", {"kind": "ring", "button": "center", "press": "hold",
                    "duration_ms": 1200}, 100)
    assert s.visible
    s, _ = engine.apply_event(
        s, "gesture", {"kind": "gesture", "gesture": "press",
                       "target": "contact", "name": "Peter"}, 200)
    assert s.focused_contact == "Peter"
    s, _ = engine.apply_event(s, "utterance", {"text": "voice message"}, 300)
    assert s.dictating
    s, _ = engine.apply_event(s, "keyboard_text", {"text": "brb"}, 400)
    assert s.draft == "brb"
    s, _ = engine.apply_event(s, "incoming", {"sender": "Bob", "body": "yo"}, 500)
    assert s.history["Bob"][0].body == "yo"
    s, _ = engine.apply_event(s, "tick", {}, 600)
    with pytest.raises(ValueError):
        engine.apply_event(s, "warp", {}, 700)


def test_apply_event_ring_hold_below_threshold_is_noop():
    s = initial_state(["Peter"])
    s2, effects = engine.apply_event(
        s, "ring", {"button": "center", "press": "hold", "duration_ms": 300}, 100)
    assert s2.visible is False and effects == []


# --- randomized properties -------------------------------------------------


def test_determinism_byte_identical_states_and_effects():
    def run(seed):
        rng = random.Random(seed)
        state, t = engine.initial_state(["Peter", "Bob"]), 0
        log = []
        for _ in range(300):
            state, t = step_random(rng, state, t)
        return json.dumps(engine.state_to_dict(state), sort_keys=True).encode()

    assert run(7) == run(7)
    assert run(8) == run(8)


def test_fuzz_mutual_exclusion_and_windows():
    rng = random.Random(1234)
    for _ in range(300):
        state, _ = random_reachable_state(rng, steps=16)
        assert not (state.dictating and state.keyboard_open)
        if state.dictating:
            assert state.visible and state.focused_contact is not None
        assert len(state.notifications) <= state.config.max_notifications
        rm = render(state)
        assert len(rm.chat_panel) <= 3
        assert len(rm.contact_panel) <= 3
        assert len(rm.notification_panel) <= 3
        if state.contacts:
            assert state.scroll_offset < len(state.contacts)


def test_unread_counts_match_notification_generating_messages():
    rng = random.Random(55)
    state = initial_state(["Peter", "Bob"])
    t = 0
    shown = 0
    resets = {}
    for _ in range(400):
        t += rng.randint(1, 300)
        roll = rng.random()
        if roll < 0.5:
            sender = rng.choice(["Peter", "Bob", "Ann"])
            state2, effects = incoming(state, sender, "hey", t)
            shown += sum(isinstance(e, ShowNotification) for e in effects)
            state = state2
        elif roll < 0.75:
            state, _ = handle_command(state, cmd(grammar.REVEAL_INTERFACE), t)
        else:
            name = rng.choice([c.name for c in state.contacts] or ["Peter"])
            before = {c.name: c.unread_count for c in state.contacts}
            state, effects = handle_command(state, cmd(grammar.SELECT_CONTACT, name), t)
            if not errors_of(effects):
                resets[name] = resets.get(name, 0) + before.get(name, 0)
    total_unread = sum(c.unread_count for c in state.contacts)
    assert total_unread == shown - sum(resets.values())
