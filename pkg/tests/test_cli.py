from __future__ import annotations

import json

from mas_runtime.cli import main

from .conftest import pipeline_doc, single_agent_doc


def write_doc(tmp_path, doc, name="topology.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_validate_ok_exit_zero(tmp_path, capsys):
    path = write_doc(tmp_path, single_agent_doc())
    assert main(["validate", str(path)]) == 0
    assert "topology ok" in capsys.readouterr().out


def test_validate_sie_duplicate_dataset_exit_one(tmp_path, capsys):
    doc = {
        "name": "bad-sie",
        "network_kind": "sie",
        "control_flow": "dynamic",
        "history_policy": "full_trace",
        "entry_agent": "coord",
        "agents": [
            {"id": "coord", "role": "route", "engine": "r", "is_coordinator": True},
            {"id": "x", "role": "specialist", "engine": "r", "tools": ["table_query"]},
            {"id": "y", "role": "specialist", "engine": "r", "tools": ["table_query"]},
        ],
        "edges": [["coord", "x"], ["coord", "y"]],
        "dataset_bindings": {"x": "cve_db", "y": "cve_db"},
        "datasets": {},
        "engines": {"r": {"type": "scripted", "rules": [{"when": {}, "then": {"type": "final", "answer": "x"}}]}},
    }
    path = write_doc(tmp_path, doc)
    assert main(["validate", str(path)]) == 1
    assert "sie_unique_dataset" in capsys.readouterr().out


def test_validate_warnings_exit_zero_with_notice(tmp_path, capsys):
    doc = single_agent_doc()
    doc["agents"][0]["tools"] = ["calculator"] * 0  # keep runnable
    doc["agents"].append(
        {"id": "worker", "role": "tools", "engine": "solo_rules", "tools": [f"calculator"]}
    )
    # 13 distinct tools would need 13 registered names; reuse the overload rule
    doc["agents"][1]["tools"] = ["calculator", "table_query", "vector_search", "kv_lookup"]
    doc["edges"] = [["solo", "worker"]]
    path = write_doc(tmp_path, doc)
    code = main(["validate", str(path)])
    assert code == 0


def test_validate_malformed_file_exit_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["validate", str(path)]) == 2
    assert "parse error" in capsys.readouterr().err


def test_run_single_agent_prints_answer_exit_zero(tmp_path, capsys):
    path = write_doc(tmp_path, single_agent_doc(answer_template="ok"))
    code = main(["run", str(path), "hello", "--data-dir", str(tmp_path / "data")])
    out = capsys.readouterr().out
    assert code == 0
    assert "ok" in out and "completed" in out


def test_run_trace_prints_labelled_log(tmp_path, capsys):
    path = write_doc(tmp_path, single_agent_doc(answer_template="ok"))
    main(["run", str(path), "hello", "--trace", "--data-dir", str(tmp_path / "data")])
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("{")]
    assert any('"kind":"user_query"' in l for l in lines)
    assert any('"kind":"final_answer"' in l for l in lines)


def test_run_failure_exit_three(tmp_path):
    doc = single_agent_doc()
    doc["engines"]["solo_rules"]["rules"] = [{"when": {}, "then": {"type": "handoff", "target_agent": "ghost"}}]
    path = write_doc(tmp_path, doc)
    assert main(["run", str(path), "q", "--data-dir", str(tmp_path / "data")]) == 3


def test_run_json_format_is_parseable(tmp_path, capsys):
    path = write_doc(tmp_path, pipeline_doc(2))
    code = main(["run", str(path), "go", "--format", "json", "--data-dir", str(tmp_path / "data")])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "completed"
    assert payload["answer"] == "done-s2"
    assert set(payload["metrics"]) >= {"decide_calls", "tool_calls", "handoffs"}


def test_replay_ok_and_tampered(tmp_path, capsys):
    path = write_doc(tmp_path, pipeline_doc(2, tool_stage=1))
    data_dir = tmp_path / "data"
    main(["run", str(path), "go", "--data-dir", str(data_dir)])
    capsys.readouterr()
    log = next(data_dir.glob("*.jsonl"))
    assert main(["replay", str(log)]) == 0
    assert "replay ok" in capsys.readouterr().out

    lines = log.read_text(encoding="utf-8").splitlines()
    idx = next(i for i, line in enumerate(lines) if '"tool_result"' in line)
    lines[idx] = lines[idx].replace('"content":"5"', '"content":"9"')
    log.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    assert main(["replay", str(log)]) == 1
    assert "divergence at seq" in capsys.readouterr().out


def test_case_cs1_json_output(capsys):
    assert main(["case", "cs1", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["scenario"] == "cs1"
    assert payload["accuracy"] == 1.0


def test_max_steps_flag_enforced(tmp_path):
    doc = single_agent_doc()
    doc["agents"][0]["tools"] = ["calculator"]
    doc["engines"]["solo_rules"]["rules"] = [
        {"when": {}, "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "{step}+1"}}}
    ]
    path = write_doc(tmp_path, doc)
    code = main(["run", str(path), "q", "--data-dir", str(tmp_path / "data"), "--max-steps", "3"])
    assert code == 3
