from __future__ import annotations

import numpy as np
import pytest

from mas_runtime.errors import (
    ArgSchemaViolation,
    EmptyStore,
    QuerySyntax,
    UnknownColumn,
    UnknownDataset,
    UnknownTool,
)
from mas_runtime.memory import MemoryStore, embed
from mas_runtime.tools import DatasetCatalog, DocStore, KvStore, Table, builtin_registry, calculator_eval, table_query
from mas_runtime.tools.calculator import CalcParseError, DivisionByZero
from mas_runtime.tools.query import render_rows


@pytest.fixture
def cve_table():
    rows = [
        {"cve_id": "CVE-0001-TEST", "cvss": "9.8", "vector": "network"},
        {"cve_id": "CVE-0002-TEST", "cvss": "5.4", "vector": "network"},
        {"cve_id": "CVE-0003-TEST", "cvss": "7.5", "vector": "network"},
        {"cve_id": "CVE-0004-TEST", "cvss": "6.1", "vector": "adjacent"},
        {"cve_id": "CVE-0005-TEST", "cvss": "8.8", "vector": "network"},
    ]
    return Table(name="cve", columns=["cve_id", "cvss", "vector"], rows=rows)


@pytest.fixture
def catalog(tmp_path, cve_table):
    catalog = DatasetCatalog()
    catalog.add_table("cve_table", cve_table)
    kv = KvStore(name="crm", entries={"CRM-1": "Ada Lovelace (AC-1)"})
    catalog.add_kv("crm", kv)
    docs_dir = tmp_path / "docs"
    docs_dir.mkdir()
    texts = {
        "d1": "ransomware hit the billing system",
        "d2": "phishing campaign against engineers",
        "d3": "ransomware actors expand to telecom billing",
    }
    for name, text in texts.items():
        (docs_dir / f"{name}.txt").write_text(text, encoding="utf-8")
    catalog.add_docs("osint", DocStore.load("osint", docs_dir))
    return catalog


# -- invoke dispatch -----------------------------------------------------------

def test_invoke_calculator_ok(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("calculator", {"expr": "2+3*4"})
    assert result.ok and result.content == "14"


def test_invoke_division_by_zero_not_thrown(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("calculator", {"expr": "1/0"})
    assert result.ok is False
    assert "DivisionByZero" in result.content


def test_invoke_unknown_tool(catalog):
    registry = builtin_registry(catalog)
    with pytest.raises(UnknownTool):
        registry.invoke("nosuch", {})


def test_invoke_schema_violations(catalog):
    registry = builtin_registry(catalog)
    with pytest.raises(ArgSchemaViolation):
        registry.invoke("calculator", {})
    with pytest.raises(ArgSchemaViolation):
        registry.invoke("calculator", {"expr": "1", "extra": "x"})
    with pytest.raises(ArgSchemaViolation):
        registry.invoke("vector_search", {"dataset": "osint", "query": "q", "k": "not-a-number"})


def test_registry_rejects_duplicate_registration(catalog):
    registry = builtin_registry(catalog)
    from mas_runtime.tools.registry import ToolSpec

    with pytest.raises(ValueError):
        registry.register(ToolSpec(name="calculator", description="again"), lambda args: None)


# -- calculator -----------------------------------------------------------------

@pytest.mark.parametrize("expr,value", [("2+3*4", 14.0), ("(10-4)/3", 2.0), ("-3+5", 2.0), ("2*(3+4)-1", 13.0), ("10/4", 2.5)])
def test_calculator_precedence(expr, value):
    assert calculator_eval(expr) == pytest.approx(value)


def test_calculator_parse_error():
    with pytest.raises(CalcParseError):
        calculator_eval("-(2)^")
    with pytest.raises(CalcParseError):
        calculator_eval("")
    with pytest.raises(CalcParseError):
        calculator_eval("1+")


def test_calculator_division_by_zero():
    with pytest.raises(DivisionByZero):
        calculator_eval("1/0")


# -- table_query -------------------------------------------------------------------

def test_table_query_fixture_echo(cve_table):
    rows = table_query(cve_table, "SELECT cvss WHERE cve_id = CVE-0001-TEST")
    assert rows == [{"cvss": "9.8"}]


def test_table_query_absent_key_empty(cve_table):
    assert table_query(cve_table, "SELECT cvss WHERE cve_id = ABSENT") == []


def test_table_query_numeric_filter_matches_manual_scan(cve_table):
    rows = table_query(cve_table, "SELECT cve_id, cvss WHERE cvss > 7.0")
    # brute-force oracle over the fixture
    expected = [
        {"cve_id": r["cve_id"], "cvss": r["cvss"]}
        for r in cve_table.rows
        if float(r["cvss"]) > 7.0
    ]
    assert rows == expected
    assert [r["cve_id"] for r in rows] == ["CVE-0001-TEST", "CVE-0003-TEST", "CVE-0005-TEST"]


def test_table_query_operators_match_manual_scan(cve_table):
    cases = [
        ("SELECT cve_id WHERE vector != network", lambda r: r["vector"] != "network"),
        ("SELECT cve_id WHERE cvss < 6.5", lambda r: float(r["cvss"]) < 6.5),
        ("SELECT cve_id WHERE cve_id contains 0003", lambda r: "0003" in r["cve_id"]),
    ]
    for query, predicate in cases:
        rows = table_query(cve_table, query)
        assert rows == [{"cve_id": r["cve_id"]} for r in cve_table.rows if predicate(r)]


def test_table_query_projection_only_named_columns(cve_table):
    rows = table_query(cve_table, "SELECT vector, cve_id")
    assert all(set(r) == {"vector", "cve_id"} for r in rows)


def test_table_query_errors(cve_table):
    with pytest.raises(UnknownColumn):
        table_query(cve_table, "SELECT nope")
    with pytest.raises(UnknownColumn):
        table_query(cve_table, "SELECT cvss WHERE nope = 1")
    with pytest.raises(QuerySyntax):
        table_query(cve_table, "DROP TABLE cve")
    with pytest.raises(QuerySyntax):
        table_query(cve_table, "SELECT cvss WHERE cvss ~= 2")


def test_table_query_max_rows(cve_table):
    assert len(table_query(cve_table, "SELECT cve_id", max_rows=2)) == 2


def test_render_rows():
    assert render_rows([]) == "(no rows)"
    assert render_rows([{"a": "1", "b": "2"}]) == "1, 2"


# -- vector search ------------------------------------------------------------------

def brute_force_top_k(store: MemoryStore, query: str, k: int):
    query_vec = embed(query)
    scored = [(r, float(np.dot(query_vec, r.vector))) for r in store.records()]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return [r.id for r, _ in scored[:k]]


def test_vector_search_singleton(catalog):
    store = MemoryStore()
    store.add_text("only", "a single document")
    assert [r.id for r, _ in store.recall("anything at all", 1)] == ["only"]


def test_vector_search_self_similarity(catalog):
    docs = catalog.docs("osint")
    text = docs.texts["d2"]
    ranked = docs.store.recall(text, 1)
    assert ranked[0][0].id == "d2"
    assert ranked[0][1] == pytest.approx(1.0, abs=1e-9)


def test_vector_search_matches_brute_force_on_ten_docs():
    store = MemoryStore()
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa"]
    for i in range(10):
        store.add_text(f"doc-{i}", f"{words[i]} report about {words[(i + 3) % 10]} and {words[(i + 7) % 10]}")
    for query in ("alpha report", "delta and kappa", "report about theta"):
        ranked = [r.id for r, _ in store.recall(query, 3)]
        assert ranked == brute_force_top_k(store, query, 3)


def test_vector_search_scores_non_increasing_and_ties_by_id(catalog):
    store = MemoryStore()
    store.add_text("b", "identical text")
    store.add_text("a", "identical text")
    ranked = store.recall("identical text", 2)
    scores = [s for _, s in ranked]
    assert scores == sorted(scores, reverse=True)
    assert [r.id for r, _ in ranked] == ["a", "b"]


def test_vector_search_empty_store():
    with pytest.raises(EmptyStore):
        MemoryStore().recall("q", 1)


def test_vector_search_tool_result_shape(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("vector_search", {"dataset": "osint", "query": "ransomware billing", "k": "2"})
    assert result.ok
    assert [d["id"] for d in result.data] == brute_force_top_k(catalog.docs("osint").store, "ransomware billing", 2)


# -- kv lookup ------------------------------------------------------------------------

def test_kv_lookup_present(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("kv_lookup", {"dataset": "crm", "key": "CRM-1"})
    assert result.ok and result.content == "Ada Lovelace (AC-1)"


def test_kv_lookup_absent(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("kv_lookup", {"dataset": "crm", "key": "CRM-404"})
    assert result.ok and result.content == "(absent)" and result.data == []


def test_kv_lookup_unknown_dataset(catalog):
    registry = builtin_registry(catalog)
    result = registry.invoke("kv_lookup", {"dataset": "nal", "key": "x"})
    assert result.ok is False and "UnknownDataset" in result.content
    with pytest.raises(UnknownDataset):
        catalog.kv("nal")
