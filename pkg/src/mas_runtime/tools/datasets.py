"""Loadable datasets: delimited tables, key-value files, and document stores.

All datasets are read-only after load, so concurrent reads need no locking.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UnknownDataset
from ..memory import MemoryStore


@dataclass
class Table:
    """Comma-delimited table with a header row; cells stay strings."""

    name: str
    columns: list[str]
    rows: list[dict[str, str]]

    @classmethod
    def load(cls, name: str, path: str | Path) -> "Table":
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            rows = [dict(zip(header, row)) for row in reader]
        return cls(name=name, columns=header, rows=rows)


@dataclass
class KvStore:
    """Two-column delimited file: exact-match key lookup."""

    name: str
    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, name: str, path: str | Path) -> "KvStore":
        entries: dict[str, str] = {}
        with open(path, newline="", encoding="utf-8") as handle:
            for row in csv.reader(handle):
                if len(row) >= 2:
                    entries[row[0]] = row[1]
        return cls(name=name, entries=entries)

    def lookup(self, key: str) -> str | None:
        return self.entries.get(key)


@dataclass
class DocStore:
    """Directory of text documents embedded into a vector store; file name is the record id."""

    name: str
    store: MemoryStore
    texts: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, name: str, path: str | Path) -> "DocStore":
        store = MemoryStore()
        texts: dict[str, str] = {}
        for doc_path in sorted(Path(path).iterdir()):
            if not doc_path.is_file():
                continue
            record_id = doc_path.stem
            text = doc_path.read_text(encoding="utf-8")
            texts[record_id] = text
            store.add_text(record_id, text, meta={"source": doc_path.name})
        return cls(name=name, store=store, texts=texts)


class DatasetCatalog:
    """Named datasets a run's tools may address."""

    def __init__(self):
        self.tables: dict[str, Table] = {}
        self.kv_stores: dict[str, KvStore] = {}
        self.doc_stores: dict[str, DocStore] = {}

    def add_table(self, dataset_id: str, table: Table) -> None:
        self.tables[dataset_id] = table

    def add_kv(self, dataset_id: str, store: KvStore) -> None:
        self.kv_stores[dataset_id] = store

    def add_docs(self, dataset_id: str, store: DocStore) -> None:
        self.doc_stores[dataset_id] = store

    def table(self, dataset_id: str) -> Table:
        if dataset_id not in self.tables:
            raise UnknownDataset(f"no table dataset {dataset_id!r}")
        return self.tables[dataset_id]

    def kv(self, dataset_id: str) -> KvStore:
        if dataset_id not in self.kv_stores:
            raise UnknownDataset(f"no key-value dataset {dataset_id!r}")
        return self.kv_stores[dataset_id]

    def docs(self, dataset_id: str) -> DocStore:
        if dataset_id not in self.doc_stores:
            raise UnknownDataset(f"no document dataset {dataset_id!r}")
        return self.doc_stores[dataset_id]

    @classmethod
    def load(cls, manifest: dict[str, dict], base_dir: str | Path) -> "DatasetCatalog":
        """Build a catalog from {dataset_id: {kind, path}} with paths relative to base_dir."""
        base = Path(base_dir)
        catalog = cls()
        for dataset_id, entry in manifest.items():
            kind = entry.get("kind", "table")
            path = base / entry["path"]
            if kind == "table":
                catalog.add_table(dataset_id, Table.load(dataset_id, path))
            elif kind == "kv":
                catalog.add_kv(dataset_id, KvStore.load(dataset_id, path))
            elif kind == "docs":
                catalog.add_docs(dataset_id, DocStore.load(dataset_id, path))
            else:
                raise UnknownDataset(f"dataset {dataset_id!r} has unknown kind {kind!r}")
        return catalog
