from __future__ import annotations

import time

from mas_runtime.engines import DecisionKind, ScriptedEngine, decide
from mas_runtime.history import apply_history_policy
from mas_runtime.model import EventKind, HandoffPayload, HistoryPolicy, TraceEvent
from mas_runtime.react import GateDecision, LoopLimits, Route, detect_repeat, run_react_loop
from mas_runtime.tools import DatasetCatalog, builtin_registry

from .conftest import make_agent, make_event


class LoopHarness:
    """Minimal ActivationServices: one agent, builtin tools, no checkpoints."""

    def __init__(self, engine: ScriptedEngine, routable=()):
        self.engine = engine
        self.registry = builtin_registry(DatasetCatalog())
        self._trace: list[TraceEvent] = []
        self._routable = tuple(routable)
        self.decide_calls = 0

    def trace(self):
        return self._trace

    def emit(self, agent_id, kind, payload):
        event = TraceEvent(len(self._trace), "t", agent_id, kind, payload, int(time.time() * 1000))
        self._trace.append(event)
        return event

    def decide(self, ctx):
        self.decide_calls += 1
        return decide(self.engine, ctx)

    def exec_tool(self, agent_id, name, args):
        return self.registry.invoke(name, args)

    def gate(self, location, agent_id, pending):
        return GateDecision(action="proceed")

    def route(self, agent_id, decision):
        if decision.kind is DecisionKind.FINAL:
            return Route(kind="final")
        payload = apply_history_policy(self._trace, HistoryPolicy.FULL_TRACE, agent_id, decision.target_agent, "q")
        return Route(kind="handoff", target=decision.target_agent, payload=payload)

    def recall(self, agent, query_text):
        return ()

    def tool_specs(self, agent):
        return tuple(self.registry.specs(list(agent.tools)))

    def routable(self, agent_id):
        return self._routable

    def remember_final(self, agent, query, answer):
        pass

    def check_interrupt(self):
        pass


def payload_for(agent_id: str, query: str) -> HandoffPayload:
    return HandoffPayload(origin_agent="user", target_agent=agent_id, original_query=query)


def run(engine_dict, query="q", limits=None, agent=None, routable=()):
    engine = ScriptedEngine.from_dict(engine_dict)
    services = LoopHarness(engine, routable=routable)
    agent = agent or make_agent("a", tools=("calculator",))
    result = run_react_loop(agent, payload_for(agent.id, query), limits or LoopLimits(), services)
    return result, services


def test_immediate_final_is_one_iteration():
    result, services = run({"rules": [{"when": {}, "then": {"type": "final", "answer": "ok"}}]})
    assert result.outcome == "final" and result.answer == "ok"
    assert [e.kind for e in result.events] == [EventKind.REASONING, EventKind.FINAL_ANSWER]
    assert services.decide_calls == 1


def test_tool_then_final_hand_simulated():
    # hand simulation of the two-rule script: decide(tool 2+3) -> observe "5"
    # -> decide(final "5"); expect exactly two iterations and the observation.
    engine = {
        "rules": [
            {"when": {"lacks_result_of": "calculator"},
             "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "2+3"}}},
            {"when": {}, "then": {"type": "final", "answer": "{last_result}"}},
        ]
    }
    result, services = run(engine)
    assert result.outcome == "final" and result.answer == "5"
    kinds = [e.kind for e in result.events]
    assert kinds == [
        EventKind.REASONING,
        EventKind.TOOL_CALL,
        EventKind.TOOL_RESULT,
        EventKind.REASONING,
        EventKind.FINAL_ANSWER,
    ]
    results = [e for e in result.events if e.kind is EventKind.TOOL_RESULT]
    assert results[0].payload["content"] == "5"
    assert services.decide_calls == 2


def test_always_tool_script_hits_step_limit_after_exactly_max_steps():
    engine = {
        "rules": [
            {"when": {}, "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "{step}+1"}}},
        ]
    }
    result, services = run(engine, limits=LoopLimits(max_steps=8, max_repeated_action=99))
    assert result.outcome == "aborted" and result.reason == "StepLimitExceeded"
    assert services.decide_calls == 8
    assert result.events[-1].kind is EventKind.ERROR


def test_loop_detected_on_identical_consecutive_calls():
    engine = {
        "rules": [
            {"when": {}, "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "1+1"}}},
        ]
    }
    result, _ = run(engine, limits=LoopLimits(max_steps=8, max_repeated_action=2))
    assert result.outcome == "aborted" and result.reason == "LoopDetected"
    calls = [e for e in result.events if e.kind is EventKind.TOOL_CALL]
    assert len(calls) == 2


def test_tool_failure_becomes_observation_and_loop_continues():
    engine = {
        "rules": [
            {"when": {"lacks_result_of": "calculator"},
             "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "1/0"}}},
            {"when": {}, "then": {"type": "final", "answer": "saw: {last_result}"}},
        ]
    }
    result, _ = run(engine)
    assert result.outcome == "final"
    assert "DivisionByZero" in result.answer
    failures = [e for e in result.events if e.kind is EventKind.TOOL_RESULT]
    assert failures[0].payload["ok"] is False


def test_handoff_decision_returns_handoff_outcome():
    engine = {"rules": [{"when": {}, "then": {"type": "handoff", "target_agent": "b"}}]}
    result, _ = run(engine, routable=("b",))
    assert result.outcome == "handoff" and result.target == "b"
    assert result.events[-1].kind is EventKind.HANDOFF


def test_illegal_decision_aborts_with_error_event():
    engine = {"rules": [{"when": {}, "then": {"type": "handoff", "target_agent": "ghost"}}]}
    result, _ = run(engine, routable=("b",))
    assert result.outcome == "aborted" and result.reason == "IllegalDecision"
    assert result.events[-1].kind is EventKind.ERROR


def test_activation_events_are_well_formed():
    engine = {
        "rules": [
            {"when": {"lacks_result_of": "calculator"},
             "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "7*6"}}},
            {"when": {}, "then": {"type": "final", "answer": "{last_result}"}},
        ]
    }
    result, _ = run(engine)
    events = result.events
    for i, event in enumerate(events):
        if event.kind is EventKind.TOOL_CALL:
            follow = events[i + 1]
            assert follow.kind is EventKind.TOOL_RESULT
            assert follow.payload["call_seq"] == event.seq
    assert events[-1].kind in (EventKind.FINAL_ANSWER, EventKind.HANDOFF, EventKind.ERROR)


def test_scripted_loop_is_deterministic_modulo_timestamps():
    engine = {
        "rules": [
            {"when": {"lacks_result_of": "calculator"},
             "then": {"type": "tool_call", "tool_name": "calculator", "tool_args": {"expr": "2+3"}}},
            {"when": {}, "then": {"type": "final", "answer": "{last_result}"}},
        ]
    }
    first, _ = run(engine)
    second, _ = run(engine)
    strip = lambda e: (e.seq, e.agent_id, e.kind, e.payload)
    assert [strip(e) for e in first.events] == [strip(e) for e in second.events]


# -- detect_repeat --------------------------------------------------------------

def _call(seq, expr):
    return make_event(seq, EventKind.TOOL_CALL, {"tool": "calculator", "args": {"expr": expr}})


def _result(seq, content):
    return make_event(seq, EventKind.TOOL_RESULT, {"call_seq": seq - 1, "tool": "calculator", "ok": True, "content": content, "data": None})


def test_detect_repeat_two_identical():
    events = [_call(0, "1+1"), _result(1, "2"), _call(2, "1+1"), _result(3, "2")]
    assert detect_repeat(events, 2) is True


def test_detect_repeat_different_args():
    events = [_call(0, "1+1"), _result(1, "2"), _call(2, "1+2"), _result(3, "3")]
    assert detect_repeat(events, 2) is False


def test_detect_repeat_needs_k_tool_calls():
    # enumerate the window: reasoning and results are ignored, only one call
    events = [
        make_event(0, EventKind.REASONING, {"decision": {"type": "final", "answer": "x"}}),
        _call(1, "1+1"),
        _result(2, "2"),
    ]
    assert detect_repeat(events, 2) is False
