"""Durable run records: append-only JSONL event logs plus state snapshots.

Every run owns two files in the data directory: ``<run_id>.jsonl`` holding the
canonical event log and ``<run_id>.state.json`` holding the latest state
snapshot. Reads go through the files, so a restarted process serves exactly
what was persisted.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .errors import UnknownRun
from .events import decode_log, encode_event
from .model import TraceEvent


class RunStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def events_path(self, run_id: str) -> Path:
        return self.data_dir / f"{run_id}.jsonl"

    def state_path(self, run_id: str) -> Path:
        return self.data_dir / f"{run_id}.state.json"

    def append_event(self, run_id: str, event: TraceEvent) -> None:
        line = encode_event(event) + "\n"
        with self._lock:
            with open(self.events_path(run_id), "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()

    def read_events(self, run_id: str) -> list[TraceEvent]:
        path = self.events_path(run_id)
        if not path.exists():
            raise UnknownRun(f"no run {run_id!r}")
        return decode_log(path.read_text(encoding="utf-8"))

    def read_events_raw(self, run_id: str) -> str:
        path = self.events_path(run_id)
        if not path.exists():
            raise UnknownRun(f"no run {run_id!r}")
        return path.read_text(encoding="utf-8")

    def write_state(self, run_id: str, snapshot: dict) -> None:
        path = self.state_path(run_id)
        tmp = path.with_suffix(".json.tmp")
        with self._lock:
            tmp.write_text(json.dumps(snapshot, indent=2, ensure_ascii=False), encoding="utf-8")
            os.replace(tmp, path)

    def read_state(self, run_id: str) -> dict:
        path = self.state_path(run_id)
        if not path.exists():
            raise UnknownRun(f"no run {run_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def has_run(self, run_id: str) -> bool:
        return self.state_path(run_id).exists() or self.events_path(run_id).exists()

    def list_runs(self) -> list[str]:
        return sorted(p.name[: -len(".state.json")] for p in self.data_dir.glob("*.state.json"))
