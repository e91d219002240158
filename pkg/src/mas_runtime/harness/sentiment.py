"""Lexicon-based sentiment categorisation of free-text feedback."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class Lexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    @classmethod
    def from_words(cls, positive: Iterable[str], negative: Iterable[str]) -> "Lexicon":
        return cls(
            positive=frozenset(w.lower() for w in positive),
            negative=frozenset(w.lower() for w in negative),
        )

    @classmethod
    def load(cls, positive_path: str | Path, negative_path: str | Path) -> "Lexicon":
        def words(path):
            return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]

        return cls.from_words(words(positive_path), words(negative_path))


def lexicon_sentiment(text: str, lexicon: Lexicon) -> str:
    """positive / negative / neutral by the sign of matched token counts."""
    tokens = _TOKEN_RE.findall(text.lower())
    score = sum(1 for t in tokens if t in lexicon.positive) - sum(1 for t in tokens if t in lexicon.negative)
    if score > 0:
        return "positive"
    if score < 0:
        return "negative"
    return "neutral"


def sentiment_split(comments: Iterable[str], lexicon: Lexicon) -> dict[str, float]:
    """Counts per category plus the positive share of all comments."""
    counts = {"positive": 0, "negative": 0, "neutral": 0}
    total = 0
    for comment in comments:
        counts[lexicon_sentiment(comment, lexicon)] += 1
        total += 1
    share = counts["positive"] / total if total else 0.0
    return {**{k: float(v) for k, v in counts.items()}, "total": float(total), "positive_share": share}
