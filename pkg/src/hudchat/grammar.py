"""Interprets raw input events (utterances, ring buttons, mid-air gestures) into commands.

All three interpreters are pure functions: they never raise on user input and
fall back to NO_COMMAND for anything unrecognized.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

# Default press-and-hold threshold for the ring center/up buttons.
HOLD_THRESHOLD_MS = 1000


class Mode(Enum):
    COMMAND = "command"
    DICTATION = "dictation"


# Command kinds. SELECT_CONTACT / TEXT_TO carry a contact name,
# APPEND_TRANSCRIPT carries the spoken/typed text; everything else is bare.
REVEAL_INTERFACE = "reveal_interface"
HIDE_INTERFACE = "hide_interface"
OPEN_NOTIFICATION = "open_notification"
SELECT_CONTACT = "select_contact"
START_DICTATION = "start_dictation"
SEND = "send"
OPEN_KEYBOARD = "open_keyboard"
CLOSE_KEYBOARD = "close_keyboard"
SCROLL_TO_TOP = "scroll_to_top"
SCROLL_UP = "scroll_up"
SCROLL_DOWN = "scroll_down"
REPLY = "reply"
TEXT_TO = "text_to"
APPEND_TRANSCRIPT = "append_transcript"
FOCUS_NEXT = "focus_next"
ACTIVATE_FOCUSED = "activate_focused"
NO_COMMAND = "no_command"

NAVIGATION_KINDS = frozenset({
    REVEAL_INTERFACE, HIDE_INTERFACE, OPEN_NOTIFICATION, SELECT_CONTACT,
    START_DICTATION, SEND, OPEN_KEYBOARD, CLOSE_KEYBOARD, SCROLL_TO_TOP,
    SCROLL_UP, SCROLL_DOWN, REPLY, TEXT_TO, FOCUS_NEXT, ACTIVATE_FOCUSED,
})


@dataclass(frozen=True)
class Command:
    kind: str
    arg: str | None = None


NoCommand = Command(NO_COMMAND)

# Fixed voice phrases. These are reserved: a contact whose display name
# collides with one of them cannot be selected by bare name.
_PHRASES = {
    "show chat": Command(REVEAL_INTERFACE),
    "hide chat": Command(HIDE_INTERFACE),
    "open notification": Command(OPEN_NOTIFICATION),
    "voice message": Command(START_DICTATION),
    "send": Command(SEND),
    "open keyboard": Command(OPEN_KEYBOARD),
    "close keyboard": Command(CLOSE_KEYBOARD),
    "scroll to the top": Command(SCROLL_TO_TOP),
    "scroll up": Command(SCROLL_UP),
    "scroll down": Command(SCROLL_DOWN),
    "reply": Command(REPLY),
}

_TEXT_PREFIX = "text "


@dataclass(frozen=True)
class Utterance:
    """One recognized speech segment. text may be empty (silence artifact)."""

    text: str
    at_ms: int = 0


@dataclass(frozen=True)
class RingEvent:
    """Ring-mouse button event: click, or hold with a duration."""

    button: str  # up | down | left | right | center
    kind: str  # click | hold
    duration_ms: int = 0


@dataclass(frozen=True)
class GestureEvent:
    """Mid-air hand event: a press on a named target, or a swipe.

    Targets: notification | contact | voice_button | keyboard_button |
    send_button | anywhere. `name` carries the contact name for contact
    presses and the id (stringified) for notification presses.
    """

    kind: str  # press | swipe_up | swipe_down
    target: str = "anywhere"
    name: str = ""


def _match_contact(spoken: str, contacts: list[str]) -> str | None:
    """Case-insensitive exact match on display name; ambiguity yields None."""
    folded = spoken.casefold()
    hits = [c for c in contacts if c.casefold() == folded]
    if len(hits) == 1:
        return hits[0]
    return None


def parse_utterance(u: Utterance, mode: Mode, contacts: list[str]) -> Command:
    """Interpret one utterance against the voice vocabulary.

    In dictation mode every non-empty utterance becomes transcript text; in
    command mode the text is matched (case-insensitive, surrounding
    whitespace ignored) against the fixed phrases, the contact roster, and
    the "text NAME" shortcut. Total: any unicode input yields a command.
    """
    text = u.text.strip()
    if mode is Mode.DICTATION:
        if not text:
            return NoCommand
        return Command(APPEND_TRANSCRIPT, text)

    if not text:
        return NoCommand
    folded = text.casefold()

    phrase = _PHRASES.get(folded)
    if phrase is not None:
        return phrase

    contact = _match_contact(text, contacts)
    if contact is not None:
        return Command(SELECT_CONTACT, contact)

    if folded.startswith(_TEXT_PREFIX):
        remainder = text[len(_TEXT_PREFIX):].strip()
        # Longest-match in case one contact name is a prefix of another.
        candidates = [
            c for c in contacts if c.casefold() == remainder.casefold()
        ]
        if len(candidates) == 1:
            return Command(TEXT_TO, candidates[0])
        return NoCommand

    return NoCommand


def map_ring_event(
    e: RingEvent,
    visible: bool,
    keyboard_open: bool,
    hold_threshold_ms: int = HOLD_THRESHOLD_MS,
) -> Command:
    """Map a ring-mouse event to a command.

    A long center press toggles hide/reveal regardless of keyboard state;
    any *click* while the keyboard is open closes it.
    """
    held = e.kind == "hold" and e.duration_ms >= hold_threshold_ms

    if e.button == "center" and held:
        return Command(HIDE_INTERFACE) if visible else Command(REVEAL_INTERFACE)
    if e.button == "up" and held:
        return Command(SCROLL_TO_TOP)
    if e.kind != "click":
        return NoCommand  # sub-threshold or unbound holds

    if keyboard_open:
        return Command(CLOSE_KEYBOARD)
    if e.button == "up":
        return Command(SCROLL_UP)
    if e.button == "down":
        return Command(SCROLL_DOWN)
    if e.button == "right":
        return Command(FOCUS_NEXT)
    if e.button == "center":
        return Command(ACTIVATE_FOCUSED)
    return NoCommand  # left click is unbound


def map_gesture_event(g: GestureEvent, keyboard_open: bool) -> Command:
    """Map a mid-air gesture to a command.

    While the virtual keyboard is open, a press anywhere (any target)
    closes it; swipes still scroll.
    """
    if g.kind == "press":
        if keyboard_open:
            return Command(CLOSE_KEYBOARD)
        if g.target == "notification":
            return Command(OPEN_NOTIFICATION)
        if g.target == "contact":
            return Command(SELECT_CONTACT, g.name)
        if g.target == "voice_button":
            return Command(START_DICTATION)
        if g.target == "keyboard_button":
            return Command(OPEN_KEYBOARD)
        if g.target == "send_button":
            return Command(SEND)
        return NoCommand  # press on dead space
    if g.kind == "swipe_up":
        return Command(SCROLL_UP)
    if g.kind == "swipe_down":
        return Command(SCROLL_DOWN)
    return NoCommand
