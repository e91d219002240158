from __future__ import annotations

import json

from mas_runtime.history import apply_history_policy, extract_prior_finals
from mas_runtime.model import EventKind, HistoryPolicy

from .conftest import make_event, sample_trace


def test_final_results_only_shares_no_internals():
    trace = sample_trace()
    payload = apply_history_policy(trace, HistoryPolicy.FINAL_RESULTS_ONLY, "a", "b", "add numbers")
    assert payload.shared_history == ()
    assert payload.prior_finals == (("a", "4"),)
    assert payload.original_query == "add numbers"
    # string-level: no internal step kinds leak through the serialized payload
    blob = json.dumps(payload.to_dict())
    assert "tool_call" not in blob and "reasoning" not in blob


def test_empty_trace_full_policy_carries_query_only():
    payload = apply_history_policy([], HistoryPolicy.FULL_TRACE, "user", "entry", "hello")
    assert payload.shared_history == ()
    assert payload.prior_finals == ()
    assert payload.original_query == "hello"


def test_full_trace_is_verbatim_copy():
    trace = sample_trace()
    payload = apply_history_policy(trace, HistoryPolicy.FULL_TRACE, "a", "b", "add numbers")
    # oracle: a direct copy of the log
    expected = list(trace)
    assert list(payload.shared_history) == expected
    assert [e.seq for e in payload.shared_history] == [e.seq for e in expected]
    assert payload.prior_finals == (("a", "4"),)


def test_prior_finals_accumulate_from_handoff_payloads():
    trace = sample_trace()
    first = apply_history_policy(trace, HistoryPolicy.FINAL_RESULTS_ONLY, "a", "b", "q")
    handoff = make_event(7, EventKind.HANDOFF, first.to_dict())
    extended = list(trace) + [
        handoff,
        make_event(8, EventKind.FINAL_ANSWER, {"answer": "done"}, agent_id="b"),
    ]
    finals = extract_prior_finals(extended)
    assert finals == (("a", "4"), ("b", "done"))


def test_payload_round_trips_through_dict():
    trace = sample_trace()
    payload = apply_history_policy(trace, HistoryPolicy.FULL_TRACE, "a", "b", "q")
    from mas_runtime.model import HandoffPayload

    assert HandoffPayload.from_dict(payload.to_dict()) == payload
