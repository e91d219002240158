"""History-sharing policies applied when one agent hands off to another."""

from __future__ import annotations

from typing import Sequence

from .model import EventKind, HandoffPayload, HistoryPolicy, TraceEvent


def extract_prior_finals(trace: Sequence[TraceEvent]) -> tuple[tuple[str, str], ...]:
    """Answers of agents whose activations concluded within the trace so far.

    Concluded answers live in two places: the run-level final_answer event,
    and the prior_finals list of handoff events (each handoff carries every
    answer concluded before it, so the lists grow monotonically and the
    longest one seen is the current accumulation).
    """
    finals: list[tuple[str, str]] = []
    for event in trace:
        if event.kind is EventKind.HANDOFF:
            carried = [(p[0], p[1]) for p in event.payload.get("prior_finals", ())]
            if len(carried) > len(finals):
                finals = carried
        elif event.kind is EventKind.FINAL_ANSWER:
            finals.append((event.agent_id, event.payload.get("answer", "")))
    return tuple(finals)


def apply_history_policy(
    trace: Sequence[TraceEvent],
    policy: HistoryPolicy,
    origin: str,
    target: str,
    query: str,
) -> HandoffPayload:
    """Build the payload for a handoff from ``origin`` to ``target``.

    full_trace shares the run log verbatim; final_results_only shares nothing
    but the concluded answers. The original query always travels.
    """
    prior_finals = extract_prior_finals(trace)
    if policy is HistoryPolicy.FULL_TRACE:
        shared: tuple[TraceEvent, ...] = tuple(trace)
    else:
        shared = ()
    return HandoffPayload(
        origin_agent=origin,
        target_agent=target,
        original_query=query,
        shared_history=shared,
        prior_finals=prior_finals,
    )
