"""Desk-scale, fixture-driven reproductions of the three case studies."""

from importlib import resources
from pathlib import Path

from .cases import HarnessReport, run_case, run_cs1, run_cs2, run_cs3
from .cost import CostModel, compute_cost
from .sentiment import Lexicon, lexicon_sentiment, sentiment_split

CASE_NAMES = ("cs1", "cs2", "cs3")


def fixture_dir(name: str) -> Path | None:
    """Path of a packaged fixture directory, or None when it does not exist."""
    root = resources.files("mas_runtime") / "fixtures" / name
    path = Path(str(root))
    return path if path.is_dir() else None


__all__ = [
    "CASE_NAMES",
    "CostModel",
    "HarnessReport",
    "Lexicon",
    "compute_cost",
    "fixture_dir",
    "lexicon_sentiment",
    "run_case",
    "run_cs1",
    "run_cs2",
    "run_cs3",
    "sentiment_split",
]
