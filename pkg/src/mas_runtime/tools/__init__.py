from .calculator import calculator_eval
from .datasets import DatasetCatalog, DocStore, KvStore, Table
from .query import table_query
from .registry import ToolRegistry, ToolResult, ToolSpec, builtin_registry

__all__ = [
    "DatasetCatalog",
    "DocStore",
    "KvStore",
    "Table",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "builtin_registry",
    "calculator_eval",
    "table_query",
]
