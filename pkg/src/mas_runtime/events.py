"""Canonical trace-event codec: one JSON object per line, fixed key order.

Two encodings of the same event are byte-identical, which is what makes run
logs diffable and replay checks meaningful.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from .errors import MalformedEvent
from .model import EventKind, TraceEvent

_TOP_KEYS = ("seq", "run_id", "agent_id", "kind", "payload", "timestamp")


def encode_event(event: TraceEvent) -> str:
    """Serialize to the canonical single-line form (no trailing newline)."""
    return json.dumps(event.to_dict(), separators=(",", ":"), ensure_ascii=False)


def decode_event(line: str) -> TraceEvent:
    """Parse one canonical line back into a TraceEvent.

    Raises MalformedEvent on anything that is not a complete, schema-valid
    record: truncated JSON, missing or extra keys, bad field types.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedEvent(f"undecodable event line: {exc}") from None
    if not isinstance(data, dict):
        raise MalformedEvent("event line is not a JSON object")
    if set(data) != set(_TOP_KEYS):
        missing = set(_TOP_KEYS) - set(data)
        extra = set(data) - set(_TOP_KEYS)
        raise MalformedEvent(f"bad event keys: missing={sorted(missing)} extra={sorted(extra)}")
    if not isinstance(data["seq"], int) or isinstance(data["seq"], bool) or data["seq"] < 0:
        raise MalformedEvent("seq must be a non-negative integer")
    if not isinstance(data["timestamp"], int) or isinstance(data["timestamp"], bool):
        raise MalformedEvent("timestamp must be an integer (ms since epoch)")
    for key in ("run_id", "agent_id", "kind"):
        if not isinstance(data[key], str):
            raise MalformedEvent(f"{key} must be a string")
    if not isinstance(data["payload"], dict):
        raise MalformedEvent("payload must be an object")
    try:
        kind = EventKind(data["kind"])
    except ValueError:
        raise MalformedEvent(f"unknown event kind {data['kind']!r}") from None
    return TraceEvent(
        seq=data["seq"],
        run_id=data["run_id"],
        agent_id=data["agent_id"],
        kind=kind,
        payload=data["payload"],
        timestamp=data["timestamp"],
    )


def encode_log(events: Iterable[TraceEvent]) -> str:
    return "".join(encode_event(e) + "\n" for e in events)


def decode_log(text: str) -> list[TraceEvent]:
    events = []
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            events.append(decode_event(line))
        except MalformedEvent as exc:
            raise MalformedEvent(f"line {lineno + 1}: {exc}") from None
    return events


def strip_timestamps(value: Any) -> Any:
    """Recursively drop every ``timestamp`` key from a JSON-shaped value.

    Used wherever two events must be compared field-for-field with wall-clock
    noise excluded (replay checks, resume verification).
    """
    if isinstance(value, dict):
        return {k: strip_timestamps(v) for k, v in value.items() if k != "timestamp"}
    if isinstance(value, list):
        return [strip_timestamps(v) for v in value]
    return value


def events_equivalent(a: TraceEvent, b: TraceEvent) -> bool:
    """Field-for-field equality, timestamps excluded at every nesting level."""
    return strip_timestamps(a.to_dict()) == strip_timestamps(b.to_dict())
