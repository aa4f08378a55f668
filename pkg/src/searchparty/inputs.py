"""Scripted chat input for headless runs.

An input script plays the human participant. Triggers fire strictly in file
order, at most one per tick:

    @tick 5 | team | Robots, I lost my keys.
    @await red keychain\\? | reply | They're on a red keychain.

``@tick N`` fires once the simulation reaches tick N. ``@await REGEX`` fires
once a later chat message from someone else matches REGEX. The addressee
``reply`` sends the line back to whoever sent the matched message, so scripts
do not hardcode which robot asks. Fields split on the LAST two pipes, leaving
alternation bars usable inside the regex.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .comms import MessageEnvelope

logger = logging.getLogger(__name__)

REPLY = "reply"


class InputError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class Trigger:
    kind: str  # "tick" | "await"
    addressee: str
    text: str
    line: int
    at_tick: int = 0
    pattern: re.Pattern | None = None


def parse_input_text(raw: str) -> list[Trigger]:
    triggers: list[Trigger] = []
    last_tick = 0
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = [p.strip() for p in stripped.rsplit("|", 2)]
        if len(parts) != 3:
            raise InputError("expected: @tick N | addressee | text  or  "
                             "@await REGEX | addressee | text", lineno)
        head, addressee, text = parts
        if not addressee:
            raise InputError("empty addressee", lineno)
        if not text:
            raise InputError("empty message text", lineno)
        if head.startswith("@tick"):
            arg = head[len("@tick"):].strip()
            try:
                at_tick = int(arg)
            except ValueError:
                raise InputError(f"bad tick number {arg!r}", lineno) from None
            if at_tick < 1:
                raise InputError("tick triggers start at 1", lineno)
            if at_tick < last_tick:
                raise InputError(
                    f"tick {at_tick} goes backwards (previous was {last_tick})",
                    lineno)
            last_tick = at_tick
            if addressee == REPLY:
                raise InputError(
                    "'reply' addressee needs an @await trigger to reply to",
                    lineno)
            triggers.append(Trigger(kind="tick", addressee=addressee,
                                    text=text, line=lineno, at_tick=at_tick))
        elif head.startswith("@await"):
            arg = head[len("@await"):].strip()
            if not arg:
                raise InputError("@await needs a regex", lineno)
            try:
                pattern = re.compile(arg, re.IGNORECASE)
            except re.error as exc:
                raise InputError(f"bad regex: {exc}", lineno) from None
            triggers.append(Trigger(kind="await", addressee=addressee,
                                    text=text, line=lineno, pattern=pattern))
        else:
            raise InputError(f"unknown trigger {head.split()[0]!r}", lineno)
    return triggers


def load_input_script(path: str | Path) -> list[Trigger]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such input script: {path}")
    return parse_input_text(path.read_text())


class InputDriver:
    """Feeds one scripted human line per tick into the chat, in order."""

    def __init__(self, triggers: list[Trigger], sender: str):
        self.triggers = list(triggers)
        self.sender = sender
        self.index = 0
        self.scan = 0  # log position; @await only matches newer messages

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.triggers)

    def step(self, tick: int, log: list[MessageEnvelope]) -> tuple[str, str] | None:
        """(addressee, text) to post this tick, or None."""
        if self.exhausted:
            return None
        trig = self.triggers[self.index]
        if trig.kind == "tick":
            if tick < trig.at_tick:
                return None
            self.index += 1
            self.scan = len(log)
            return (trig.addressee, trig.text)
        assert trig.pattern is not None
        for i in range(self.scan, len(log)):
            env = log[i]
            if env.channel != "chat" or env.sender == self.sender:
                continue
            if trig.pattern.search(env.surface):
                self.index += 1
                self.scan = i + 1
                addressee = env.sender if trig.addressee == REPLY \
                    else trig.addressee
                return (addressee, trig.text)
        return None
