"""Mini query language over loaded tables.

Grammar:  SELECT <col>[,<col>]* [WHERE <col> <op> <literal>]
with op one of  = != < > contains.  Row order follows file order and the
result is capped at ``max_rows``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySyntax, UnknownColumn
from .datasets import Table

DEFAULT_MAX_ROWS = 50

_OPS = ("!=", "=", "<", ">", "contains")
_QUERY_RE = re.compile(r"^\s*select\s+(?P<cols>.+?)(?:\s+where\s+(?P<cond>.+))?\s*$", re.IGNORECASE | re.DOTALL)
_COND_RE = re.compile(r"^(?P<col>\S+)\s+(?P<op>!=|=|<|>|contains)\s+(?P<lit>.+)$", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class ParsedQuery:
    columns: tuple[str, ...]
    filter_column: str | None = None
    op: str | None = None
    literal: str | None = None


def parse_query(text: str) -> ParsedQuery:
    match = _QUERY_RE.match(text)
    if not match:
        raise QuerySyntax(f"not a SELECT query: {text!r}")
    columns = tuple(col.strip() for col in match.group("cols").split(","))
    if any(not col for col in columns):
        raise QuerySyntax("empty column name in projection")
    cond = match.group("cond")
    if cond is None:
        return ParsedQuery(columns=columns)
    cond_match = _COND_RE.match(cond.strip())
    if not cond_match:
        raise QuerySyntax(f"bad WHERE clause: {cond.strip()!r}")
    literal = cond_match.group("lit").strip()
    if len(literal) >= 2 and literal[0] == literal[-1] and literal[0] in "'\"":
        literal = literal[1:-1]
    return ParsedQuery(
        columns=columns,
        filter_column=cond_match.group("col"),
        op=cond_match.group("op").lower(),
        literal=literal,
    )


def _matches(cell: str, op: str, literal: str) -> bool:
    if op == "=":
        return cell == literal
    if op == "!=":
        return cell != literal
    if op == "contains":
        return literal in cell
    # < and > compare numerically when both sides parse, else lexically.
    try:
        return float(cell) < float(literal) if op == "<" else float(cell) > float(literal)
    except ValueError:
        return cell < literal if op == "<" else cell > literal


def table_query(table: Table, query_text: str, max_rows: int = DEFAULT_MAX_ROWS) -> list[dict[str, str]]:
    """Projection plus optional single-condition filter, preserving file order."""
    query = parse_query(query_text)
    for col in query.columns:
        if col not in table.columns:
            raise UnknownColumn(f"no column {col!r} in table {table.name!r}")
    if query.filter_column is not None and query.filter_column not in table.columns:
        raise UnknownColumn(f"no column {query.filter_column!r} in table {table.name!r}")

    out: list[dict[str, str]] = []
    for row in table.rows:
        if query.filter_column is not None:
            assert query.op is not None and query.literal is not None
            if not _matches(row.get(query.filter_column, ""), query.op, query.literal):
                continue
        out.append({col: row.get(col, "") for col in query.columns})
        if len(out) >= max_rows:
            break
    return out


def render_rows(rows: list[dict[str, str]]) -> str:
    """Readable text form fed back to engines as the observation."""
    if not rows:
        return "(no rows)"
    return "\n".join(", ".join(row.values()) for row in rows)
