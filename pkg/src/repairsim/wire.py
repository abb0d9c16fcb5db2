"""JSON wire protocol between the gateway and operator consoles.

One message per line: ``{"v": 1, "type": ..., "seq": ..., "payload": {...}}``.
Sequence numbers are strictly increasing per connection in each direction;
unknown types and sequence regressions are protocol violations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .world import WorldState, collected_count

WIRE_VERSION = 1

MESSAGE_TYPES = (
    "world_snapshot",
    "help_request",
    "teleop_command",
    "operator_feedback",
    "decline",
    "give_up",
    "trial_event",
    "resume_ack",
)


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class WireMessage:
    type: str
    seq: int
    payload: dict = field(default_factory=dict)
    v: int = WIRE_VERSION

    def __post_init__(self) -> None:
        if self.type not in MESSAGE_TYPES:
            raise WireError(f"unknown message type {self.type!r}")
        if self.v != WIRE_VERSION:
            raise WireError(f"unsupported wire version {self.v!r}")
        if not isinstance(self.seq, int) or self.seq < 0:
            raise WireError(f"bad seq {self.seq!r}")


def encode(message: WireMessage) -> str:
    record = {"v": message.v, "type": message.type, "seq": message.seq, "payload": message.payload}
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def decode(line: str) -> WireMessage:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise WireError("message must be a JSON object")
    for key in ("v", "type", "seq"):
        if key not in record:
            raise WireError(f"missing field {key!r}")
    payload = record.get("payload", {})
    if not isinstance(payload, dict):
        raise WireError("payload must be a JSON object")
    return WireMessage(type=record["type"], seq=record["seq"], payload=payload, v=record["v"])


class SequenceGuard:
    """Rejects non-increasing sequence numbers on one direction of a link."""

    def __init__(self) -> None:
        self.last: int | None = None

    def check(self, seq: int) -> None:
        if self.last is not None and seq <= self.last:
            raise WireError(f"seq {seq} not greater than {self.last}")
        self.last = seq


class Outbound:
    """Per-connection outgoing counter."""

    def __init__(self) -> None:
        self.next_seq = 0

    def message(self, message_type: str, payload: dict) -> WireMessage:
        message = WireMessage(type=message_type, seq=self.next_seq, payload=payload)
        self.next_seq += 1
        return message


def snapshot_payload(world: WorldState, mode: str, budget: int, phases: dict[str, str]) -> dict:
    counts = collected_count(world)
    return {
        "tick": world.tick,
        "budget": budget,
        "mode": mode,
        "rooms": list(world.config.rooms),
        "robots": [world.robots[key].to_dict() for key in sorted(world.robots)],
        "objects": [world.objects[key].to_dict() for key in sorted(world.objects)],
        "collected": {**counts.to_dict(), "ids": list(world.collected)},
        "phases": dict(phases),
    }
