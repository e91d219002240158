from __future__ import annotations

import pytest

from mas_runtime.model import (
    AgentSpec,
    ControlFlow,
    EventKind,
    HistoryPolicy,
    NetworkKind,
    TopologyGraph,
    TraceEvent,
)


def make_agent(agent_id: str, **kw) -> AgentSpec:
    defaults = dict(role=f"{agent_id} role", engine=f"{agent_id}_engine", tools=(), is_coordinator=False)
    defaults.update(kw)
    return AgentSpec(id=agent_id, **defaults)


def make_topology(
    agents,
    edges=(),
    network_kind=NetworkKind.SUPERVISOR,
    control_flow=ControlFlow.DYNAMIC,
    history_policy=HistoryPolicy.FULL_TRACE,
    entry_agent=None,
    checkpoints=(),
    dataset_bindings=None,
) -> TopologyGraph:
    return TopologyGraph(
        agents=tuple(agents),
        edges=tuple(edges),
        network_kind=network_kind,
        control_flow=control_flow,
        history_policy=history_policy,
        entry_agent=entry_agent or agents[0].id,
        checkpoints=tuple(checkpoints),
        dataset_bindings=dict(dataset_bindings or {}),
    )


def make_event(seq: int, kind: EventKind, payload: dict, agent_id: str = "a", run_id: str = "r1") -> TraceEvent:
    return TraceEvent(seq=seq, run_id=run_id, agent_id=agent_id, kind=kind, payload=payload, timestamp=1_700_000_000_000 + seq)


def sample_trace(run_id: str = "r1") -> list[TraceEvent]:
    """A hand-built well-formed prefix: query, reasoning, two tool calls, a final."""
    return [
        make_event(0, EventKind.USER_QUERY, {"query": "add numbers"}, agent_id="user", run_id=run_id),
        make_event(1, EventKind.REASONING, {"decision": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "1+1"}}}, run_id=run_id),
        make_event(2, EventKind.TOOL_CALL, {"tool": "calculator", "args": {"expr": "1+1"}}, run_id=run_id),
        make_event(3, EventKind.TOOL_RESULT, {"call_seq": 2, "tool": "calculator", "ok": True, "content": "2", "data": None}, run_id=run_id),
        make_event(4, EventKind.TOOL_CALL, {"tool": "calculator", "args": {"expr": "2+2"}}, run_id=run_id),
        make_event(5, EventKind.TOOL_RESULT, {"call_seq": 4, "tool": "calculator", "ok": True, "content": "4", "data": None}, run_id=run_id),
        make_event(6, EventKind.FINAL_ANSWER, {"answer": "4"}, run_id=run_id),
    ]


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "runs"


def single_agent_doc(answer_template: str = "ok", checkpoints=(), history="full_trace") -> dict:
    return {
        "name": "single",
        "network_kind": "supervisor",
        "control_flow": "dynamic",
        "history_policy": history,
        "entry_agent": "solo",
        "agents": [{"id": "solo", "role": "answer directly", "engine": "solo_rules", "is_coordinator": True}],
        "edges": [],
        "checkpoints": list(checkpoints),
        "engines": {
            "solo_rules": {
                "type": "scripted",
                "rules": [{"when": {}, "then": {"type": "final", "answer": answer_template}}],
            }
        },
    }


def pipeline_doc(n_stages: int = 3, history: str = "full_trace", tool_stage: int | None = None) -> dict:
    """Explicit chain s1 -> s2 -> ... where each stage finishes with a stage answer.

    When tool_stage is given, that stage (0-based, must be the last) performs
    one calculator call before finishing; intermediate stages own no tools.
    """
    agents = []
    engines = {}
    for i in range(n_stages):
        name = f"s{i + 1}"
        rules = []
        tools = []
        if tool_stage == i:
            tools = ["calculator"]
            rules.append(
                {
                    "when": {"lacks_result_of": "calculator"},
                    "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "2+3"}},
                }
            )
        rules.append({"when": {}, "then": {"type": "final", "answer": f"done-{name}"}})
        agents.append({"id": name, "role": f"stage {name}", "engine": f"{name}_rules", "tools": tools})
        engines[f"{name}_rules"] = {"type": "scripted", "rules": rules}
    return {
        "name": "pipeline",
        "network_kind": "hierarchical",
        "control_flow": "explicit",
        "history_policy": history,
        "entry_agent": "s1",
        "agents": agents,
        "edges": [[f"s{i + 1}", f"s{i + 2}"] for i in range(n_stages - 1)],
        "checkpoints": [],
        "engines": engines,
    }
