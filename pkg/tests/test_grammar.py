"""Input interpretation: the full interaction table, mode gating, totality."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hudchat import grammar
from hudchat.grammar import (
    Command,
    GestureEvent,
    Mode,
    NoCommand,
    RingEvent,
    Utterance,
    map_gesture_event,
    map_ring_event,
    parse_utterance,
)

CONTACTS = ["Peter", "Mary"]


def parse(text, mode=Mode.COMMAND, contacts=CONTACTS):
    return parse_utterance(Utterance(text=text), mode, contacts)


# One row per supported function: (voice phrase, ring event + state, gesture
# + state, expected command). None marks an empty cell.
INTERACTION_TABLE = [
    # reveal interface
    ("show chat", (RingEvent("center", "hold", 1200), False, False), None,
     Command(grammar.REVEAL_INTERFACE)),
    # hide interface
    ("hide chat", (RingEvent("center", "hold", 1200), True, False), None,
     Command(grammar.HIDE_INTERFACE)),
    # open the chat related to notification
    ("open notification", None, (GestureEvent("press", "notification", "7"), False),
     Command(grammar.OPEN_NOTIFICATION)),
    # open the chat with the contact NAME (ring column navigates instead)
    ("Peter", None, (GestureEvent("press", "contact", "Peter"), False),
     Command(grammar.SELECT_CONTACT, "Peter")),
    # activate voice dictation
    ("voice message", None, (GestureEvent("press", "voice_button"), False),
     Command(grammar.START_DICTATION)),
    # send the message
    ("send", None, (GestureEvent("press", "send_button"), False),
     Command(grammar.SEND)),
    # open the virtual keyboard
    ("open keyboard", None, (GestureEvent("press", "keyboard_button"), False),
     Command(grammar.OPEN_KEYBOARD)),
    # close the virtual keyboard: any click / press anywhere
    ("close keyboard", (RingEvent("down", "click"), True, True),
     (GestureEvent("press", "anywhere"), True), Command(grammar.CLOSE_KEYBOARD)),
    # go to the topmost contact
    ("scroll to the top", (RingEvent("up", "hold", 1500), True, False), None,
     Command(grammar.SCROLL_TO_TOP)),
    # go to closest top contact
    ("scroll up", (RingEvent("up", "click"), True, False),
     (GestureEvent("swipe_up"), False), Command(grammar.SCROLL_UP)),
    # go to closest bottom contact
    ("scroll down", (RingEvent("down", "click"), True, False),
     (GestureEvent("swipe_down"), False), Command(grammar.SCROLL_DOWN)),
    # reply shortcut
    ("reply", None, None, Command(grammar.REPLY)),
    # text NAME shortcut
    ("text Peter", None, None, Command(grammar.TEXT_TO, "Peter")),
]


def test_interaction_table_is_complete():
    assert len(INTERACTION_TABLE) == 13


@pytest.mark.parametrize("voice,ring,gesture,expected", INTERACTION_TABLE)
def test_interaction_table(voice, ring, gesture, expected):
    assert parse(voice) == expected
    if ring is not None:
        event, visible, keyboard_open = ring
        assert map_ring_event(event, visible, keyboard_open) == expected
    if gesture is not None:
        event, keyboard_open = gesture
        assert map_gesture_event(event, keyboard_open) == expected


def test_ring_contact_navigation_and_activation():
    # The contact row's ring cell scrolls; the dictation/send/keyboard rows
    # share one cell: right to cycle focus, center to activate it.
    assert map_ring_event(RingEvent("up", "click"), True, False) == Command(grammar.SCROLL_UP)
    assert map_ring_event(RingEvent("down", "click"), True, False) == Command(grammar.SCROLL_DOWN)
    assert map_ring_event(RingEvent("right", "click"), True, False) == Command(grammar.FOCUS_NEXT)
    assert map_ring_event(RingEvent("center", "click"), True, False) == Command(grammar.ACTIVATE_FOCUSED)


def test_unbound_ring_inputs():
    assert map_ring_event(RingEvent("left", "click"), True, False) == NoCommand
    assert map_ring_event(RingEvent("center", "hold", 400), True, False) == NoCommand
    assert map_ring_event(RingEvent("down", "hold", 1500), True, False) == NoCommand


def test_any_click_closes_keyboard():
    for button in ("up", "down", "left", "right", "center"):
        assert map_ring_event(RingEvent(button, "click"), True, True) == \
            Command(grammar.CLOSE_KEYBOARD)


def test_press_any_target_closes_keyboard():
    for target in ("notification", "contact", "voice_button", "keyboard_button",
                   "send_button", "anywhere"):
        assert map_gesture_event(GestureEvent("press", target, "x"), True) == \
            Command(grammar.CLOSE_KEYBOARD)


def test_swipes_scroll_even_with_keyboard_open():
    assert map_gesture_event(GestureEvent("swipe_up"), True) == Command(grammar.SCROLL_UP)
    assert map_gesture_event(GestureEvent("swipe_down"), True) == Command(grammar.SCROLL_DOWN)


def test_parse_examples():
    assert parse("show chat", contacts=["Peter"]) == Command(grammar.REVEAL_INTERFACE)
    assert parse("text Peter") == Command(grammar.TEXT_TO, "Peter")
    assert parse("reply", contacts=["Peter"]) == Command(grammar.REPLY)
    assert parse("", contacts=["Peter"]) == NoCommand
    assert parse("see you at five", Mode.DICTATION, ["Peter"]) == \
        Command(grammar.APPEND_TRANSCRIPT, "see you at five")


def test_parse_is_case_insensitive_and_trims():
    assert parse("  SHOW CHAT  ") == Command(grammar.REVEAL_INTERFACE)
    assert parse("Scroll To The Top") == Command(grammar.SCROLL_TO_TOP)
    assert parse("peter") == Command(grammar.SELECT_CONTACT, "Peter")
    assert parse("TEXT MARY") == Command(grammar.TEXT_TO, "Mary")


def test_ambiguous_contact_is_no_command():
    contacts = ["Peter", "peter"]
    assert parse("PETER", contacts=contacts) == NoCommand
    assert parse("text peter", contacts=contacts) == NoCommand


def test_unknown_name_in_text_shortcut():
    assert parse("text Nobody") == NoCommand
    assert parse("text") == NoCommand  # bare prefix, no name


def test_reserved_phrases_shadow_contact_names():
    # A contact literally named "Send" cannot be selected by bare voice.
    assert parse("send", contacts=["Send"]) == Command(grammar.SEND)
    assert parse("text Send", contacts=["Send"]) == Command(grammar.TEXT_TO, "Send")


def test_dictation_mode_returns_transcript_only():
    assert parse("show chat", Mode.DICTATION) == \
        Command(grammar.APPEND_TRANSCRIPT, "show chat")
    assert parse("   ", Mode.DICTATION) == NoCommand


@given(st.text(max_size=50))
@settings(max_examples=300)
def test_totality_both_modes(text):
    for mode in (Mode.COMMAND, Mode.DICTATION):
        cmd = parse_utterance(Utterance(text=text), mode, CONTACTS)
        assert isinstance(cmd, Command)


@given(st.text(max_size=50))
@settings(max_examples=300)
def test_dictation_never_navigates(text):
    cmd = parse_utterance(Utterance(text=text), Mode.DICTATION, CONTACTS)
    assert cmd.kind not in grammar.NAVIGATION_KINDS


@given(st.text(max_size=30))
@settings(max_examples=200)
def test_command_parse_upper_lower_agree(text):
    contacts = ["Peter"]
    a = parse_utterance(Utterance(text=text.upper()), Mode.COMMAND, contacts)
    b = parse_utterance(Utterance(text=text.lower()), Mode.COMMAND, contacts)
    # Commands (not contact references) are case-blind end to end.
    if a.kind not in (grammar.SELECT_CONTACT, grammar.TEXT_TO, grammar.APPEND_TRANSCRIPT):
        if b.kind not in (grammar.SELECT_CONTACT, grammar.TEXT_TO):
            assert a.kind == b.kind


def test_fuzz_sample_is_quiet():
    rng = random.Random(99)
    from support import random_text

    for _ in range(2000):
        text = random_text(rng, 40)
        for mode in (Mode.COMMAND, Mode.DICTATION):
            cmd = parse_utterance(Utterance(text=text), mode, CONTACTS)
            assert isinstance(cmd, Command)
