"""Short-term window management and a deterministic long-term semantic store.

The embedder is a hashed bag-of-tokens: no learned weights, so identical text
always lands on identical vectors and recall rankings are reproducible across
machines and runs. 64 dimensions is plenty at desk scale.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyStore
from .model import EventKind, TraceEvent

EMBED_DIM = 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text: str) -> np.ndarray:
    """Hash tokens into 64 buckets and L2-normalise the counts.

    Empty token sets embed to the zero vector (norm 0, not 1).
    """
    counts = np.zeros(EMBED_DIM, dtype=np.float64)
    for token in _TOKEN_RE.findall(text.lower()):
        counts[_fnv1a64(token.encode("utf-8")) % EMBED_DIM] += 1.0
    norm = float(np.linalg.norm(counts))
    if norm == 0.0:
        return counts
    return counts / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    # Stored vectors are unit or zero, so the dot product is the cosine.
    return float(np.dot(a, b))


@dataclass
class MemoryRecord:
    id: str
    text: str
    vector: np.ndarray
    meta: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_text(cls, record_id: str, text: str, meta: dict[str, str] | None = None) -> "MemoryRecord":
        return cls(id=record_id, text=text, vector=embed(text), meta=dict(meta or {}))

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "vector": self.vector.tolist(), "meta": self.meta}

    @classmethod
    def from_dict(cls, data: dict) -> "MemoryRecord":
        return cls(
            id=data["id"],
            text=data["text"],
            vector=np.asarray(data["vector"], dtype=np.float64),
            meta=dict(data.get("meta", {})),
        )


class MemoryStore:
    """Linear-scan vector store with deterministic tie-breaking by record id."""

    def __init__(self):
        self._records: dict[str, MemoryRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def upsert(self, record: MemoryRecord) -> None:
        self._records[record.id] = record

    def add_text(self, record_id: str, text: str, meta: dict[str, str] | None = None) -> MemoryRecord:
        record = MemoryRecord.from_text(record_id, text, meta)
        self.upsert(record)
        return record

    def get(self, record_id: str) -> MemoryRecord | None:
        return self._records.get(record_id)

    def records(self) -> list[MemoryRecord]:
        return list(self._records.values())

    def recall(self, query_text: str, k: int) -> list[tuple[MemoryRecord, float]]:
        """Top-k records by cosine similarity against the query embedding.

        Ranking is (-score, record id), so equal scores resolve to the lower
        id; that keeps recall stable under insertion order and replayable.
        """
        if not self._records:
            raise EmptyStore("recall against an empty store")
        if k < 1:
            raise ValueError("k must be >= 1")
        query_vec = embed(query_text)
        scored = [(record, cosine(query_vec, record.vector)) for record in self._records.values()]
        scored.sort(key=lambda pair: (-pair[1], pair[0].id))
        return scored[:k]

    def save(self, path: str | Path) -> None:
        lines = [json.dumps(r.to_dict(), separators=(",", ":")) for r in sorted(self._records.values(), key=lambda r: r.id)]
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MemoryStore":
        store = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                store.upsert(MemoryRecord.from_dict(json.loads(line)))
        return store


def truncate_window(events: Sequence[TraceEvent], budget: int) -> list[TraceEvent]:
    """Keep the earliest user_query plus the most recent budget-1 events.

    Order is preserved; a zero budget empties the window entirely.
    """
    if budget <= 0:
        return []
    events = list(events)
    query_at = next((i for i, e in enumerate(events) if e.kind is EventKind.USER_QUERY), None)
    if query_at is None:
        return events[-budget:]
    rest = [i for i in range(len(events)) if i != query_at]
    tail = rest[len(rest) - (budget - 1):] if budget > 1 else []
    return [events[i] for i in sorted([query_at] + tail)]
