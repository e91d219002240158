"""Declared cost model for automated pipelines.

Unit economics need a concrete, stated basis at desk scale: token volume is
estimated from the serialized character mass of the run logs
(timestamps excluded so replays and reruns price identically), multiplied by
a configurable per-token price. The model is calibrated, not measured from a
live billing meter, and says so.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

from ..events import strip_timestamps
from ..model import TraceEvent


@dataclass(frozen=True)
class CostModel:
    price_per_1k_tokens: float
    tokens_per_char: float = 0.25
    manual_rate: float = 3.0  # emails per minute, manual baseline
    manual_cost: float = 0.33  # currency per email, manual baseline

    def __post_init__(self):
        for name in ("price_per_1k_tokens", "tokens_per_char", "manual_rate", "manual_cost"):
            if getattr(self, name) <= 0:
                raise ValueError(f"cost model field {name} must be positive")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CostModel":
        return cls(
            price_per_1k_tokens=float(data["price_per_1k_tokens"]),
            tokens_per_char=float(data.get("tokens_per_char", 0.25)),
            manual_rate=float(data.get("manual_rate", 3.0)),
            manual_cost=float(data.get("manual_cost", 0.33)),
        )


def event_char_mass(events: Sequence[TraceEvent]) -> int:
    """Serialized payload characters of a log, wall-clock noise stripped."""
    total = 0
    for event in events:
        payload = strip_timestamps(event.payload)
        total += len(json.dumps(payload, separators=(",", ":"), ensure_ascii=False))
    return total


def compute_cost(
    logs: Sequence[Sequence[TraceEvent]],
    model: CostModel,
) -> dict[str, float]:
    """Aggregate unit economics over one log per processed item.

    cost_per_item is linear in the price and depends only on total character
    mass, so it is invariant under event reordering of equal mass. Throughput
    comes from the first and last recorded timestamps across all items.
    """
    n_items = len(logs)
    total_chars = sum(event_char_mass(log) for log in logs)
    tokens = total_chars * model.tokens_per_char
    total_cost = tokens / 1000.0 * model.price_per_1k_tokens
    cost_per_item = total_cost / n_items if n_items else 0.0

    timestamps = [e.timestamp for log in logs for e in log]
    if timestamps and n_items:
        elapsed_ms = max(max(timestamps) - min(timestamps), 1)
        throughput = n_items / (elapsed_ms / 60000.0)
    else:
        throughput = 0.0

    manual_ratio = model.manual_cost / cost_per_item if cost_per_item > 0 else 0.0
    return {
        "cost_per_item": cost_per_item,
        "throughput": throughput,
        "manual_ratio": manual_ratio,
        "total_chars": float(total_chars),
        "n_items": float(n_items),
    }
