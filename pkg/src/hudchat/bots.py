"""Scripted conversation partners.

A bot is a named rule list: the first rule whose trigger substring appears
in an incoming message (or whose trigger is "any") fires, scheduling its
reply bodies after delay_ms plus a jitter derived from (rng_seed, seq).
With a fixed seed the whole exchange is reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .wire import PROTOCOL_VERSION, WireFrame


@dataclass(frozen=True)
class BotRule:
    trigger: str  # "any" matches everything; otherwise case-insensitive substring
    reply_bodies: tuple[str, ...]
    delay_ms: int = 0
    jitter_ms: int = 0


@dataclass(frozen=True)
class BotScript:
    name: str
    rules: tuple[BotRule, ...]
    rng_seed: int = 0


class BotScriptError(ValueError):
    pass


def _rule_from_dict(obj: dict, where: str) -> BotRule:
    if not isinstance(obj, dict):
        raise BotScriptError(f"{where}: rule must be an object")
    trigger = obj.get("trigger")
    if not isinstance(trigger, str) or not trigger:
        raise BotScriptError(f"{where}: trigger must be a non-empty string")
    bodies = obj.get("reply_bodies")
    if (
        not isinstance(bodies, list)
        or not bodies
        or not all(isinstance(b, str) for b in bodies)
    ):
        raise BotScriptError(f"{where}: reply_bodies must be a non-empty list of strings")
    delay = obj.get("delay_ms", 0)
    jitter = obj.get("jitter_ms", 0)
    for label, value in (("delay_ms", delay), ("jitter_ms", jitter)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise BotScriptError(f"{where}: {label} must be a non-negative integer")
    return BotRule(trigger=trigger, reply_bodies=tuple(bodies),
                   delay_ms=delay, jitter_ms=jitter)


def script_from_dict(obj: dict, where: str = "script", default_seed: int = 0) -> BotScript:
    if not isinstance(obj, dict):
        raise BotScriptError(f"{where}: script must be an object")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise BotScriptError(f"{where}: name must be a non-empty string")
    rules = obj.get("rules")
    if not isinstance(rules, list):
        raise BotScriptError(f"{where} ({name}): rules must be a list")
    seed = obj.get("rng_seed", default_seed)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise BotScriptError(f"{where} ({name}): rng_seed must be an integer")
    parsed = tuple(
        _rule_from_dict(r, f"{where} ({name}) rule {i}") for i, r in enumerate(rules)
    )
    return BotScript(name=name, rules=parsed, rng_seed=seed)


def load_bot_scripts(path: str | Path, default_seed: int = 0) -> list[BotScript]:
    """Read a JSON array of bot scripts; duplicate names are rejected.

    default_seed fills in rng_seed for scripts that do not set their own.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise BotScriptError("bot script file must be a JSON array")
    scripts = [
        script_from_dict(s, f"script {i}", default_seed) for i, s in enumerate(doc)
    ]
    names = [s.name for s in scripts]
    if len(set(names)) != len(names):
        raise BotScriptError("duplicate bot names in script file")
    return scripts


def _jitter(seed: int, seq: int, jitter_ms: int) -> int:
    if jitter_ms <= 0:
        return 0
    return random.Random(f"{seed}:{seq}").randint(0, jitter_ms)


def bot_step(
    script: BotScript, incoming: WireFrame, now_ms: int
) -> list[tuple[int, WireFrame]]:
    """Replies for one incoming message, as (due_ms, frame) pairs.

    The frames carry no ts/seq/id; the router assigns those when each
    reply is dispatched at its due time.
    """
    if incoming.type != "msg" or incoming.to != script.name:
        return []
    body_folded = incoming.body.casefold()
    for rule in script.rules:
        if rule.trigger == "any" or rule.trigger.casefold() in body_folded:
            due = now_ms + rule.delay_ms + _jitter(script.rng_seed, incoming.seq, rule.jitter_ms)
            return [
                (
                    due,
                    WireFrame(
                        type="msg",
                        from_=script.name,
                        to=incoming.from_,
                        body=body,
                        v=PROTOCOL_VERSION,
                    ),
                )
                for body in rule.reply_bodies
            ]
    return []
