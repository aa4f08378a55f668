"""Message bus shared by every participant, plus the transcript wire format.

Every externally visible event travels as a ``MessageEnvelope`` on one of six
channels. The bus assigns a single gapless sequence number across channels,
so any consumer holding a cursor can resume without loss. One transcript line
encodes one envelope:

    seq|tick|channel|sender|addressee|<surface json string>|<mr json object>

The surface is JSON-encoded (quotes and all) so pipes and newlines inside it
cannot break the field framing; the attached meaning representation is a
canonical JSON object with sorted keys, or ``null``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

CHANNELS = ("chat", "thought", "agenda-update", "vmr", "tmr", "map")
TEAM_ADDRESSEE = "team"


class CommsError(Exception):
    pass


@dataclass(frozen=True)
class MessageEnvelope:
    seq: int
    tick: int
    channel: str
    sender: str
    addressee: str
    surface: str
    attached_mr: dict | None = None

    def encode(self) -> str:
        for label, value in (("channel", self.channel),
                             ("sender", self.sender),
                             ("addressee", self.addressee)):
            if "|" in value or "\n" in value:
                raise CommsError(f"{label} may not contain '|' or newline: "
                                 f"{value!r}")
        mr = json.dumps(self.attached_mr, sort_keys=True,
                        separators=(",", ":"))
        return "|".join([
            str(self.seq), str(self.tick), self.channel, self.sender,
            self.addressee, json.dumps(self.surface), mr,
        ])


def decode_line(line: str) -> MessageEnvelope:
    parts = line.rstrip("\n").split("|", 5)
    if len(parts) != 6:
        raise CommsError(f"malformed transcript line: {line!r}")
    seq_s, tick_s, channel, sender, addressee, rest = parts
    try:
        seq, tick = int(seq_s), int(tick_s)
    except ValueError:
        raise CommsError(f"non-numeric seq/tick in: {line!r}") from None
    if channel not in CHANNELS:
        raise CommsError(f"unknown channel {channel!r}")
    decoder = json.JSONDecoder()
    try:
        surface, end = decoder.raw_decode(rest)
        if not isinstance(surface, str) or rest[end:end + 1] != "|":
            raise ValueError
        mr = json.loads(rest[end + 1:])
    except ValueError:
        raise CommsError(f"bad payload fields in: {line!r}") from None
    return MessageEnvelope(seq=seq, tick=tick, channel=channel, sender=sender,
                           addressee=addressee, surface=surface,
                           attached_mr=mr)


class MessageBus:
    """Ordered log of envelopes with cursor-based reads."""

    def __init__(self, participants: list[str]):
        self.participants = set(participants)
        self.log: list[MessageEnvelope] = []

    def register(self, participant: str) -> None:
        self.participants.add(participant)

    def post(self, tick: int, channel: str, sender: str, addressee: str,
             surface: str, attached_mr: dict | None = None) -> MessageEnvelope:
        if channel not in CHANNELS:
            raise CommsError(f"unknown channel {channel!r}")
        if sender not in self.participants:
            raise CommsError(f"unknown sender {sender!r}")
        env = MessageEnvelope(seq=len(self.log), tick=tick, channel=channel,
                              sender=sender, addressee=addressee,
                              surface=surface, attached_mr=attached_mr)
        env.encode()  # validate framing before committing
        self.log.append(env)
        return env

    def since(self, cursor: int) -> list[MessageEnvelope]:
        return self.log[cursor:]

    def chat_inbox(self, participant: str, cursor: int,
                   upto: int | None = None) -> tuple[list[MessageEnvelope], int]:
        """Chat envelopes in ``log[cursor:upto]`` addressed to this participant
        or to the whole team, excluding its own. Returns (messages, new cursor).
        ``upto`` bounds delivery so messages posted later the same tick wait."""
        end = len(self.log) if upto is None else upto
        out = []
        for env in self.log[cursor:end]:
            if env.channel != "chat" or env.sender == participant:
                continue
            if env.addressee in (participant, TEAM_ADDRESSEE):
                out.append(env)
        return out, end

    def encode_all(self) -> list[str]:
        return [env.encode() for env in self.log]


@dataclass
class Subscription:
    bus: MessageBus
    cursor: int = 0
    channels: tuple[str, ...] = CHANNELS

    def read(self) -> list[MessageEnvelope]:
        fresh = [env for env in self.bus.since(self.cursor)
                 if env.channel in self.channels]
        self.cursor = len(self.bus.log)
        return fresh
