"""Tool registry and the built-in tools the case studies rely on."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..errors import ArgSchemaViolation, MasError, UnknownTool
from .calculator import calculator_eval, format_number
from .datasets import DatasetCatalog
from .query import DEFAULT_MAX_ROWS, render_rows, table_query


@dataclass(frozen=True)
class ArgSpec:
    name: str
    kind: str  # string | int | number | bool
    required: bool = True


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    args_schema: tuple[ArgSpec, ...] = ()
    side_effecting: bool = False

    def __post_init__(self):
        names = [a.name for a in self.args_schema]
        if len(set(names)) != len(names):
            raise ValueError(f"tool {self.name!r}: duplicate arg names")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "args": [{"name": a.name, "kind": a.kind, "required": a.required} for a in self.args_schema],
            "side_effecting": self.side_effecting,
        }


@dataclass
class ToolResult:
    ok: bool
    content: str
    data: list[dict[str, Any]] | None = None

    def to_payload(self) -> dict[str, Any]:
        return {"ok": self.ok, "content": self.content, "data": self.data}


ToolFn = Callable[[dict[str, Any]], ToolResult]


@dataclass
class _Entry:
    spec: ToolSpec
    fn: ToolFn


class ToolRegistry:
    """Named tools with schema-checked dispatch.

    Internal tool failures come back as ``ok=False`` results so the calling
    agent can observe them and re-plan; only caller mistakes (unknown tool,
    schema violations) raise.
    """

    def __init__(self):
        self._entries: dict[str, _Entry] = {}

    def register(self, spec: ToolSpec, fn: ToolFn) -> None:
        if spec.name in self._entries:
            raise ValueError(f"tool {spec.name!r} already registered")
        self._entries[spec.name] = _Entry(spec=spec, fn=fn)

    def names(self) -> list[str]:
        return list(self._entries)

    def spec(self, name: str) -> ToolSpec:
        if name not in self._entries:
            raise UnknownTool(f"no tool named {name!r}")
        return self._entries[name].spec

    def specs(self, names: list[str] | tuple[str, ...]) -> list[ToolSpec]:
        return [self.spec(name) for name in names]

    def invoke(self, name: str, args: dict[str, Any]) -> ToolResult:
        if name not in self._entries:
            raise UnknownTool(f"no tool named {name!r}")
        entry = self._entries[name]
        checked = _check_args(entry.spec, args)
        try:
            return entry.fn(checked)
        except MasError as exc:
            return ToolResult(ok=False, content=f"{type(exc).__name__}: {exc}")
        except (ValueError, KeyError) as exc:
            return ToolResult(ok=False, content=f"tool failure: {exc}")


def _check_args(spec: ToolSpec, args: dict[str, Any]) -> dict[str, Any]:
    known = {a.name: a for a in spec.args_schema}
    for arg_name in args:
        if arg_name not in known:
            raise ArgSchemaViolation(f"tool {spec.name!r}: unexpected argument {arg_name!r}")
    checked: dict[str, Any] = {}
    for arg in spec.args_schema:
        if arg.name not in args:
            if arg.required:
                raise ArgSchemaViolation(f"tool {spec.name!r}: missing required argument {arg.name!r}")
            continue
        checked[arg.name] = _coerce(spec.name, arg, args[arg.name])
    return checked


def _coerce(tool_name: str, arg: ArgSpec, value: Any) -> Any:
    try:
        if arg.kind == "string":
            if not isinstance(value, str):
                raise ValueError("expected string")
            return value
        if arg.kind == "int":
            if isinstance(value, bool):
                raise ValueError("expected int")
            return int(value)
        if arg.kind == "number":
            if isinstance(value, bool):
                raise ValueError("expected number")
            return float(value)
        if arg.kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise ValueError("expected bool")
    except (TypeError, ValueError):
        raise ArgSchemaViolation(
            f"tool {tool_name!r}: argument {arg.name!r} is not a valid {arg.kind}"
        ) from None
    raise ArgSchemaViolation(f"tool {tool_name!r}: argument {arg.name!r} has unknown kind {arg.kind!r}")


def builtin_registry(catalog: DatasetCatalog, max_rows: int = DEFAULT_MAX_ROWS) -> ToolRegistry:
    """Registry with the four built-ins wired to the given dataset catalog."""
    registry = ToolRegistry()

    def _calculator(args: dict[str, Any]) -> ToolResult:
        value = calculator_eval(args["expr"])
        return ToolResult(ok=True, content=format_number(value))

    registry.register(
        ToolSpec(
            name="calculator",
            description="Evaluate an arithmetic expression (+ - * / and parentheses).",
            args_schema=(ArgSpec("expr", "string"),),
        ),
        _calculator,
    )

    def _table_query(args: dict[str, Any]) -> ToolResult:
        table = catalog.table(args["dataset"])
        rows = table_query(table, args["query"], max_rows=max_rows)
        return ToolResult(ok=True, content=render_rows(rows), data=rows)

    registry.register(
        ToolSpec(
            name="table_query",
            description="Run `SELECT col[,col]* [WHERE col <op> literal]` over a table dataset.",
            args_schema=(ArgSpec("dataset", "string"), ArgSpec("query", "string")),
        ),
        _table_query,
    )

    def _vector_search(args: dict[str, Any]) -> ToolResult:
        docs = catalog.docs(args["dataset"])
        ranked = docs.store.recall(args["query"], args.get("k", 3))
        data = [
            {"id": record.id, "score": round(score, 6), "text": record.text}
            for record, score in ranked
        ]
        content = "\n".join(f"[{d['id']}] {' '.join(d['text'].split())[:160]}" for d in data)
        return ToolResult(ok=True, content=content or "(no documents)", data=data)

    registry.register(
        ToolSpec(
            name="vector_search",
            description="Rank documents of a dataset by cosine similarity to the query text.",
            args_schema=(ArgSpec("dataset", "string"), ArgSpec("query", "string"), ArgSpec("k", "int", required=False)),
        ),
        _vector_search,
    )

    def _kv_lookup(args: dict[str, Any]) -> ToolResult:
        store = catalog.kv(args["dataset"])
        value = store.lookup(args["key"])
        if value is None:
            return ToolResult(ok=True, content="(absent)", data=[])
        return ToolResult(ok=True, content=value, data=[{"key": args["key"], "value": value}])

    registry.register(
        ToolSpec(
            name="kv_lookup",
            description="Exact-match lookup of a key in a key-value dataset.",
            args_schema=(ArgSpec("dataset", "string"), ArgSpec("key", "string")),
        ),
        _kv_lookup,
    )

    return registry
