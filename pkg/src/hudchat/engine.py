"""Deterministic per-session state machine for the heads-up messaging UI.

Three entry points consume events: handle_command (interpreted inputs),
handle_incoming (messages delivered from the server), and tick (clock).
Each returns a new state plus an ordered list of effects; the functions
never mutate their input, so replaying the same event sequence from the
same initial state reproduces states and effect logs exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import grammar
from .grammar import Command

# Table-derived layout constants: the chat and contact panels window the
# last three entries; the virtual canvas is 2048x1080 px.
MESSAGE_WINDOW = 3
CONTACT_WINDOW = 3
CANVAS_PX = (2048, 1080)

FOCUS_ORDER = ("voice", "keyboard", "send")


@dataclass(frozen=True)
class EngineConfig:
    silence_gap_ms: int = 2000
    max_notifications: int = 3
    boost_duration_ms: int = 5000
    base_opacity: float = 0.70
    boost_opacity: float = 0.95


@dataclass
class Contact:
    name: str
    last_activity_ms: int = 0
    unread_count: int = 0


@dataclass(frozen=True)
class Message:
    id: str
    sender: str  # contact name, or "self" for locally composed messages
    recipient: str
    body: str
    ts_ms: int


@dataclass(frozen=True)
class Notification:
    id: int
    sender: str
    arrived_ms: int
    preview: str


@dataclass
class SessionState:
    config: EngineConfig = field(default_factory=EngineConfig)
    visible: bool = False
    focused_contact: str | None = None
    scroll_offset: int = 0
    input_focus: str = "voice"
    dictating: bool = False
    last_speech_ms: int | None = None
    keyboard_open: bool = False
    draft: str = ""
    contacts: list[Contact] = field(default_factory=list)
    history: dict[str, list[Message]] = field(default_factory=dict)
    notifications: list[Notification] = field(default_factory=list)  # newest first
    opacity_boost: dict[str, int] = field(default_factory=dict)  # name -> expiry
    next_notification_id: int = 1
    last_event_ms: int = 0

    def copy(self) -> "SessionState":
        return replace(
            self,
            contacts=[replace(c) for c in self.contacts],
            history={k: list(v) for k, v in self.history.items()},
            notifications=list(self.notifications),
            opacity_boost=dict(self.opacity_boost),
        )


def initial_state(
    contact_names: list[str] | None = None,
    config: EngineConfig | None = None,
) -> SessionState:
    """Fresh hidden session with the given contact roster."""
    cfg = config or EngineConfig()
    names = contact_names or []
    return SessionState(
        config=cfg,
        contacts=[Contact(name=n) for n in names],
    )


# --- effects -----------------------------------------------------------


@dataclass(frozen=True)
class SendMessage:
    message: Message


@dataclass(frozen=True)
class Beep:
    pass


@dataclass(frozen=True)
class ShowNotification:
    notification: Notification


@dataclass(frozen=True)
class StartDictationFeedback:
    pass


@dataclass(frozen=True)
class StopDictationFeedback:
    pass


@dataclass(frozen=True)
class OpacityBoost:
    contact: str
    until_ms: int


@dataclass(frozen=True)
class ErrorEffect:
    code: str


Effect = (
    SendMessage
    | Beep
    | ShowNotification
    | StartDictationFeedback
    | StopDictationFeedback
    | OpacityBoost
    | ErrorEffect
)


def effect_record(t_ms: int, effect: Effect) -> dict:
    """One effect as a JSON-serializable log record: {"t", "effect", "data"}."""
    if isinstance(effect, SendMessage):
        m = effect.message
        data = {"id": m.id, "to": m.recipient, "body": m.body, "ts": m.ts_ms}
        name = "send_message"
    elif isinstance(effect, Beep):
        name, data = "beep", {}
    elif isinstance(effect, ShowNotification):
        n = effect.notification
        data = {"id": n.id, "sender": n.sender, "arrived_ms": n.arrived_ms,
                "preview": n.preview}
        name = "show_notification"
    elif isinstance(effect, StartDictationFeedback):
        name, data = "start_dictation_feedback", {}
    elif isinstance(effect, StopDictationFeedback):
        name, data = "stop_dictation_feedback", {}
    elif isinstance(effect, OpacityBoost):
        name = "opacity_boost"
        data = {"contact": effect.contact, "until_ms": effect.until_ms}
    elif isinstance(effect, ErrorEffect):
        name, data = "error", {"code": effect.code}
    else:
        raise TypeError(f"not an effect: {effect!r}")
    return {"t": t_ms, "effect": name, "data": data}


def encode_effect_log(records: list[dict]) -> bytes:
    """Effect log serialization: one compact UTF-8 JSON object per line."""
    lines = [
        json.dumps(r, ensure_ascii=False, separators=(",", ":"), sort_keys=True)
        for r in records
    ]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


# --- event handling ----------------------------------------------------


def _check_clock(s: SessionState, now_ms: int) -> None:
    if now_ms < s.last_event_ms:
        raise ValueError(
            f"clock went backwards: {now_ms} < {s.last_event_ms}"
        )


def _find_contact(s: SessionState, name: str) -> Contact | None:
    for c in s.contacts:
        if c.name == name:
            return c
    return None


def _max_scroll(s: SessionState) -> int:
    return max(0, len(s.contacts) - CONTACT_WINDOW)


def _stop_dictation(s: SessionState, effects: list[Effect]) -> None:
    if s.dictating:
        s.dictating = False
        effects.append(StopDictationFeedback())


def _local_message_id(s: SessionState, recipient: str) -> str:
    n = len(s.history.get(recipient, ())) + 1
    return f"self~{recipient}-{n}"


def handle_command(
    s: SessionState, c: Command, now_ms: int
) -> tuple[SessionState, list[Effect]]:
    """Apply one interpreted command.

    Failed commands leave the state untouched and report an error effect;
    composite commands (reply, text NAME) expand to their two-command
    sequence and abort atomically on the first failing sub-command.
    """
    _check_clock(s, now_ms)

    if c.kind == grammar.NO_COMMAND:
        return s, []

    if not s.visible and c.kind != grammar.REVEAL_INTERFACE:
        return s, [ErrorEffect("hidden")]

    if c.kind == grammar.REPLY:
        return _apply_sequence(
            s, [Command(grammar.OPEN_NOTIFICATION), Command(grammar.START_DICTATION)], now_ms
        )
    if c.kind == grammar.TEXT_TO:
        return _apply_sequence(
            s, [Command(grammar.SELECT_CONTACT, c.arg), Command(grammar.START_DICTATION)], now_ms
        )
    if c.kind == grammar.ACTIVATE_FOCUSED:
        target = {
            "voice": grammar.START_DICTATION,
            "keyboard": grammar.OPEN_KEYBOARD,
            "send": grammar.SEND,
        }[s.input_focus]
        return handle_command(s, Command(target), now_ms)

    new = s.copy()
    new.last_event_ms = now_ms
    effects: list[Effect] = []

    if c.kind == grammar.REVEAL_INTERFACE:
        new.visible = True
    elif c.kind == grammar.HIDE_INTERFACE:
        # Mutual exclusion: dictation cannot outlive visibility.
        _stop_dictation(new, effects)
        new.visible = False
    elif c.kind == grammar.SELECT_CONTACT:
        contact = _find_contact(new, c.arg or "")
        if contact is None:
            return s, [ErrorEffect("unknown_contact")]
        new.focused_contact = contact.name
        contact.unread_count = 0
    elif c.kind == grammar.OPEN_NOTIFICATION:
        if not new.notifications:
            return s, [ErrorEffect("no_notification")]
        notif = new.notifications.pop(0)  # newest first
        new.focused_contact = notif.sender
        contact = _find_contact(new, notif.sender)
        if contact is not None:
            contact.unread_count = 0
    elif c.kind == grammar.START_DICTATION:
        if new.dictating:
            return s, []
        if new.focused_contact is None:
            return s, [ErrorEffect("no_contact")]
        new.dictating = True
        new.keyboard_open = False
        new.last_speech_ms = now_ms
        new.input_focus = "voice"
        effects.append(StartDictationFeedback())
    elif c.kind == grammar.APPEND_TRANSCRIPT:
        text = c.arg or ""
        if not text:
            return s, []
        new.draft = f"{new.draft} {text}" if new.draft else text
        new.last_speech_ms = now_ms
    elif c.kind == grammar.SEND:
        if not new.draft:
            return s, [ErrorEffect("empty_draft")]
        if new.focused_contact is None:
            return s, [ErrorEffect("no_contact")]
        recipient = new.focused_contact
        msg = Message(
            id=_local_message_id(new, recipient),
            sender="self",
            recipient=recipient,
            body=new.draft,
            ts_ms=now_ms,
        )
        new.history.setdefault(recipient, []).append(msg)
        new.draft = ""
        _touch_contact(new, recipient, now_ms)
        effects.append(SendMessage(msg))
    elif c.kind == grammar.OPEN_KEYBOARD:
        if not new.keyboard_open:
            _stop_dictation(new, effects)
            new.keyboard_open = True
            new.input_focus = "keyboard"
    elif c.kind == grammar.CLOSE_KEYBOARD:
        new.keyboard_open = False
    elif c.kind == grammar.SCROLL_UP:
        new.scroll_offset = max(0, new.scroll_offset - 1)
    elif c.kind == grammar.SCROLL_DOWN:
        new.scroll_offset = min(_max_scroll(new), new.scroll_offset + 1)
    elif c.kind == grammar.SCROLL_TO_TOP:
        new.scroll_offset = 0
    elif c.kind == grammar.FOCUS_NEXT:
        i = FOCUS_ORDER.index(new.input_focus)
        new.input_focus = FOCUS_ORDER[(i + 1) % len(FOCUS_ORDER)]
    else:
        raise ValueError(f"unknown command kind: {c.kind}")

    return new, effects


def _apply_sequence(
    s: SessionState, commands: list[Command], now_ms: int
) -> tuple[SessionState, list[Effect]]:
    """Run a composite shortcut; the first failing sub-command aborts it."""
    cur = s
    out: list[Effect] = []
    for sub in commands:
        cur, effects = handle_command(cur, sub, now_ms)
        errors = [e for e in effects if isinstance(e, ErrorEffect)]
        if errors:
            return s, [errors[0]]
        out.extend(effects)
    return cur, out


def _touch_contact(s: SessionState, name: str, now_ms: int) -> Contact:
    """Move a contact to the top of the recency ordering, adding if new."""
    contact = _find_contact(s, name)
    if contact is None:
        contact = Contact(name=name, last_activity_ms=now_ms)
        s.contacts.insert(0, contact)
    else:
        contact.last_activity_ms = now_ms
        s.contacts.remove(contact)
        s.contacts.insert(0, contact)
    return contact


def handle_incoming(
    s: SessionState, m: Message, now_ms: int
) -> tuple[SessionState, list[Effect]]:
    """Deliver a message from the server into the session.

    Always appends to history, beeps, and boosts the sender's panel
    opacity; raises a notification (and unread count) only when the
    sender's chat is not the focused, visible one.
    """
    _check_clock(s, now_ms)
    new = s.copy()
    new.last_event_ms = now_ms

    contact = _touch_contact(new, m.sender, now_ms)
    new.history.setdefault(m.sender, []).append(m)
    until = now_ms + new.config.boost_duration_ms
    new.opacity_boost[m.sender] = until

    effects: list[Effect] = []
    suppressed = new.visible and new.focused_contact == m.sender
    if not suppressed:
        notif = Notification(
            id=new.next_notification_id,
            sender=m.sender,
            arrived_ms=now_ms,
            preview=m.body[:80],
        )
        new.next_notification_id += 1
        new.notifications.insert(0, notif)
        del new.notifications[new.config.max_notifications:]
        contact.unread_count += 1
        effects.append(ShowNotification(notif))
    effects.append(Beep())
    effects.append(OpacityBoost(m.sender, until))
    return new, effects


def tick(s: SessionState, now_ms: int) -> tuple[SessionState, list[Effect]]:
    """Advance the clock: auto-stop dictation after the silence gap and
    drop expired opacity boosts. The draft survives the auto-stop."""
    _check_clock(s, now_ms)
    new = s.copy()
    new.last_event_ms = now_ms
    effects: list[Effect] = []
    if (
        new.dictating
        and new.last_speech_ms is not None
        and now_ms - new.last_speech_ms >= new.config.silence_gap_ms
    ):
        new.dictating = False
        effects.append(StopDictationFeedback())
    expired = [k for k, v in new.opacity_boost.items() if v <= now_ms]
    for k in expired:
        del new.opacity_boost[k]
    return new, effects


def dictation_deadline(s: SessionState) -> int | None:
    """Time at which an active dictation will auto-stop, if any."""
    if s.dictating and s.last_speech_ms is not None:
        return s.last_speech_ms + s.config.silence_gap_ms
    return None


def apply_event(
    s: SessionState, kind: str, payload: dict, now_ms: int
) -> tuple[SessionState, list[Effect]]:
    """Feed one raw session event (trace record or browser event).

    Utterances are interpreted against the current mode, manual inputs
    against the current visibility and keyboard state; keyboard_text is
    transcript text typed instead of spoken.
    """
    if kind == "utterance":
        mode = grammar.Mode.DICTATION if s.dictating else grammar.Mode.COMMAND
        cmd = grammar.parse_utterance(
            grammar.Utterance(text=payload.get("text", ""), at_ms=now_ms),
            mode,
            [c.name for c in s.contacts],
        )
        return handle_command(s, cmd, now_ms)
    if kind == "ring":
        # ring events carry their click/hold discriminator under "press"
        # ("kind" is taken by the event kind itself)
        event = grammar.RingEvent(
            button=payload.get("button", ""),
            kind=payload.get("press", "click"),
            duration_ms=payload.get("duration_ms", 0),
        )
        cmd = grammar.map_ring_event(event, s.visible, s.keyboard_open)
        return handle_command(s, cmd, now_ms)
    if kind == "gesture":
        event = grammar.GestureEvent(
            kind=payload.get("gesture", ""),
            target=payload.get("target", "anywhere"),
            name=payload.get("name", ""),
        )
        cmd = grammar.map_gesture_event(event, s.keyboard_open)
        return handle_command(s, cmd, now_ms)
    if kind == "keyboard_text":
        cmd = Command(grammar.APPEND_TRANSCRIPT, payload.get("text", ""))
        return handle_command(s, cmd, now_ms)
    if kind == "incoming":
        sender = payload.get("sender", "")
        n = len(s.history.get(sender, ())) + 1
        msg = Message(
            id=payload.get("id") or f"in~{sender}-{n}",
            sender=sender,
            recipient="self",
            body=payload.get("body", ""),
            ts_ms=payload.get("ts_ms", now_ms),
        )
        return handle_incoming(s, msg, now_ms)
    if kind == "tick":
        return tick(s, now_ms)
    raise ValueError(f"unknown event kind: {kind}")


# --- rendering ---------------------------------------------------------


@dataclass(frozen=True)
class InputPanel:
    mode: str  # dictation | keyboard | idle
    draft: str
    focus: str


@dataclass
class RenderModel:
    visible: bool
    notification_panel: list[Notification]  # anchor top-center
    chat_panel: list[Message]  # anchor middle-center
    contact_panel: list[Contact]  # anchor middle-right
    input_panel: InputPanel
    canvas: tuple[int, int] = CANVAS_PX


def render(s: SessionState) -> RenderModel:
    """Project the state onto the four panels; pure and deterministic."""
    if not s.visible:
        return RenderModel(
            visible=False,
            notification_panel=[],
            chat_panel=[],
            contact_panel=[],
            input_panel=InputPanel(mode="idle", draft="", focus=s.input_focus),
        )
    chat: list[Message] = []
    if s.focused_contact is not None:
        chat = list(s.history.get(s.focused_contact, ()))[-MESSAGE_WINDOW:]
    mode = "dictation" if s.dictating else ("keyboard" if s.keyboard_open else "idle")
    return RenderModel(
        visible=True,
        notification_panel=list(s.notifications),
        chat_panel=chat,
        contact_panel=[
            replace(c)
            for c in s.contacts[s.scroll_offset:s.scroll_offset + CONTACT_WINDOW]
        ],
        input_panel=InputPanel(mode=mode, draft=s.draft, focus=s.input_focus),
    )


def boosted_contacts(s: SessionState, now_ms: int) -> set[str]:
    """Contacts whose panels currently draw at the boosted opacity."""
    return {k for k, v in s.opacity_boost.items() if v > now_ms}


def render_to_dict(rm: RenderModel) -> dict:
    return {
        "visible": rm.visible,
        "notification_panel": [
            {"id": n.id, "sender": n.sender, "arrived_ms": n.arrived_ms,
             "preview": n.preview}
            for n in rm.notification_panel
        ],
        "chat_panel": [
            {"id": m.id, "sender": m.sender, "recipient": m.recipient,
             "body": m.body, "ts_ms": m.ts_ms}
            for m in rm.chat_panel
        ],
        "contact_panel": [
            {"name": c.name, "last_activity_ms": c.last_activity_ms,
             "unread_count": c.unread_count}
            for c in rm.contact_panel
        ],
        "input_panel": {
            "mode": rm.input_panel.mode,
            "draft": rm.input_panel.draft,
            "focus": rm.input_panel.focus,
        },
        "canvas": list(rm.canvas),
    }


def state_to_dict(s: SessionState) -> dict:
    """JSON-serializable snapshot, used for golden comparisons and the wire."""
    return {
        "visible": s.visible,
        "focused_contact": s.focused_contact,
        "scroll_offset": s.scroll_offset,
        "input_focus": s.input_focus,
        "dictating": s.dictating,
        "last_speech_ms": s.last_speech_ms,
        "keyboard_open": s.keyboard_open,
        "draft": s.draft,
        "contacts": [
            {"name": c.name, "last_activity_ms": c.last_activity_ms,
             "unread_count": c.unread_count}
            for c in s.contacts
        ],
        "history": {
            name: [
                {"id": m.id, "sender": m.sender, "recipient": m.recipient,
                 "body": m.body, "ts_ms": m.ts_ms}
                for m in msgs
            ]
            for name, msgs in s.history.items()
        },
        "notifications": [
            {"id": n.id, "sender": n.sender, "arrived_ms": n.arrived_ms,
             "preview": n.preview}
            for n in s.notifications
        ],
        "opacity_boost": dict(s.opacity_boost),
        "last_event_ms": s.last_event_ms,
    }
