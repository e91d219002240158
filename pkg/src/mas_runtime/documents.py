"""Topology documents: the JSON configuration a run is built from.

A document declares the agent graph plus everything needed to execute it:
engine bindings (scripted rule tables or a remote endpoint), dataset
manifests, and limit overrides. Paths inside the manifest resolve relative
to the document's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .engines import Engine, RemoteConfig, RemoteEngine, ScriptedEngine
from .errors import MasError
from .model import TopologyGraph
from .orchestrator import RunLimits
from .tools import DatasetCatalog, ToolRegistry, builtin_registry


class DocumentError(MasError):
    """The document itself cannot be interpreted (distinct from validation findings)."""


@dataclass
class LoadedDocument:
    topology: TopologyGraph
    engines: dict[str, Engine]
    catalog: DatasetCatalog
    registry: ToolRegistry
    limits: RunLimits
    document: dict[str, Any] = field(default_factory=dict)
    base_dir: str = ""


def load_document(
    data: dict[str, Any],
    base_dir: str | Path = ".",
    engine_override: str | None = None,
    limits_override: dict[str, Any] | None = None,
) -> LoadedDocument:
    """Interpret a topology document into runnable pieces.

    ``engine_override="remote"`` rebinds every referenced engine to one remote
    engine configured from the environment; the default uses the document's
    own bindings.
    """
    if not isinstance(data, dict):
        raise DocumentError("topology document must be a JSON object")
    try:
        topology = TopologyGraph.from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise DocumentError(f"bad topology document: {exc}") from None

    referenced = {agent.engine for agent in topology.agents}
    engines: dict[str, Engine] = {}
    if engine_override == "remote":
        remote = RemoteEngine(RemoteConfig.from_env())
        engines = {name: remote for name in referenced}
    else:
        declared = data.get("engines", {})
        for name in sorted(referenced):
            if name not in declared:
                raise DocumentError(f"agent references unknown engine binding {name!r}")
            engines[name] = _build_engine(name, declared[name])

    try:
        catalog = DatasetCatalog.load(data.get("datasets", {}), base_dir)
    except (OSError, KeyError) as exc:
        raise DocumentError(f"bad dataset manifest: {exc}") from None
    registry = builtin_registry(catalog)

    for agent in topology.agents:
        for tool in agent.tools:
            if tool not in registry.names():
                raise DocumentError(f"agent {agent.id!r} references unknown tool {tool!r}")

    limits_data = dict(data.get("limits", {}))
    limits_data.update(limits_override or {})
    limits = RunLimits.from_dict(limits_data)

    return LoadedDocument(
        topology=topology,
        engines=engines,
        catalog=catalog,
        registry=registry,
        limits=limits,
        document=data,
        base_dir=str(base_dir),
    )


def _build_engine(name: str, spec: dict[str, Any]) -> Engine:
    kind = spec.get("type")
    if kind == "scripted":
        try:
            return ScriptedEngine.from_dict(spec)
        except (ValueError, KeyError) as exc:
            raise DocumentError(f"engine {name!r}: {exc}") from None
    if kind == "remote":
        overrides = {k: spec[k] for k in ("url", "model", "api_key") if k in spec}
        return RemoteEngine(RemoteConfig.from_env(**overrides))
    raise DocumentError(f"engine {name!r} has unknown type {kind!r}")


def load_document_file(
    path: str | Path,
    engine_override: str | None = None,
    limits_override: dict[str, Any] | None = None,
) -> LoadedDocument:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read topology document {path}: {exc}") from None
    return load_document(
        data, base_dir=path.parent, engine_override=engine_override, limits_override=limits_override
    )
