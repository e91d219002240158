"""One agent's reasoning loop: decide, act, observe, repeat until terminal.

The loop is deliberately ignorant of topology and persistence; everything it
needs arrives through an ActivationServices bundle, which is also what lets
the orchestrator re-drive recorded runs through the identical code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .engines import Decision, DecisionKind, PromptContext
from .errors import MasError
from .memory import MemoryRecord, truncate_window
from .model import AgentSpec, CheckpointLocation, EventKind, HandoffPayload, TraceEvent
from .tools import ToolResult, ToolSpec


@dataclass(frozen=True)
class LoopLimits:
    max_steps: int = 8
    max_repeated_action: int = 2

    def __post_init__(self):
        if self.max_steps < 1 or self.max_repeated_action < 1:
            raise ValueError("loop limits must be >= 1")


@dataclass
class AgentResult:
    """Outcome of one activation plus the events it appended."""

    outcome: str  # final | handoff | aborted
    events: list[TraceEvent]
    answer: str = ""
    target: str = ""
    payload: HandoffPayload | None = None
    reason: str = ""


@dataclass
class GateDecision:
    action: str  # proceed | approve | reject | edit
    reason: str = ""
    text: str = ""


@dataclass
class Route:
    kind: str  # final | handoff
    target: str = ""
    payload: HandoffPayload | None = None


class SuspendRun(Exception):
    """Raised by a blocking checkpoint; unwinds to the orchestrator."""

    def __init__(self, request_id: str):
        self.request_id = request_id
        super().__init__(f"awaiting approval {request_id}")


class InterruptRun(Exception):
    """Raised when an operator interrupt was requested."""


class ActivationServices(Protocol):
    def trace(self) -> Sequence[TraceEvent]: ...
    def emit(self, agent_id: str, kind: EventKind, payload: dict) -> TraceEvent: ...
    def decide(self, ctx: PromptContext) -> Decision: ...
    def exec_tool(self, agent_id: str, name: str, args: dict) -> ToolResult: ...
    def gate(self, location: CheckpointLocation, agent_id: str, pending: dict) -> GateDecision: ...
    def route(self, agent_id: str, decision: Decision) -> Route: ...
    def recall(self, agent: AgentSpec, query_text: str) -> tuple[MemoryRecord, ...]: ...
    def tool_specs(self, agent: AgentSpec) -> tuple[ToolSpec, ...]: ...
    def routable(self, agent_id: str) -> tuple[str, ...]: ...
    def remember_final(self, agent: AgentSpec, query: str, answer: str) -> None: ...
    def check_interrupt(self) -> None: ...


def detect_repeat(events: Sequence[TraceEvent], k: int) -> bool:
    """True when the last k tool calls are pairwise identical in name and args."""
    calls = [e for e in events if e.kind is EventKind.TOOL_CALL]
    if len(calls) < k:
        return False
    tail = calls[-k:]
    first = (tail[0].payload.get("tool"), tail[0].payload.get("args"))
    return all((e.payload.get("tool"), e.payload.get("args")) == first for e in tail)


def run_react_loop(
    agent: AgentSpec,
    payload: HandoffPayload,
    limits: LoopLimits,
    services: ActivationServices,
) -> AgentResult:
    """Drive one activation to its terminal event.

    Tool failures are observations, not errors: the loop feeds the diagnostic
    back to the engine and lets it re-plan. Engine and routing failures abort
    the activation with an error event.
    """
    start = len(services.trace())

    def activation_events() -> list[TraceEvent]:
        return list(services.trace())[start:]

    def abort(code: str, message: str) -> AgentResult:
        services.emit(agent.id, EventKind.ERROR, {"code": code, "message": message})
        return AgentResult(outcome="aborted", reason=code, events=activation_events())

    for _ in range(limits.max_steps):
        services.check_interrupt()
        window = truncate_window(
            [*payload.shared_history, *activation_events()], agent.memory.window_budget
        )
        ctx = PromptContext(
            agent=agent,
            query=payload.original_query,
            window=tuple(window),
            retrieved=services.recall(agent, payload.original_query),
            available_tools=services.tool_specs(agent),
            routable_agents=services.routable(agent.id),
            prior_finals=payload.prior_finals,
        )
        try:
            decision = services.decide(ctx)
        except MasError as exc:
            return abort(type(exc).__name__, str(exc))
        services.emit(agent.id, EventKind.REASONING, {"decision": decision.to_dict()})

        if decision.kind is DecisionKind.TOOL_CALL:
            call_event = services.emit(
                agent.id,
                EventKind.TOOL_CALL,
                {"tool": decision.tool_name, "args": decision.tool_args},
            )
            gate = services.gate(
                CheckpointLocation.PRE_TOOL_CALL,
                agent.id,
                {"tool": decision.tool_name, "args": decision.tool_args},
            )
            if gate.action == "reject":
                continue
            services.check_interrupt()
            try:
                result = services.exec_tool(agent.id, decision.tool_name, decision.tool_args)
            except MasError as exc:
                result = ToolResult(ok=False, content=f"{type(exc).__name__}: {exc}")
            services.emit(
                agent.id,
                EventKind.TOOL_RESULT,
                {"call_seq": call_event.seq, "tool": decision.tool_name, **result.to_payload()},
            )
            if detect_repeat(activation_events(), limits.max_repeated_action):
                return abort(
                    "LoopDetected",
                    f"{limits.max_repeated_action} identical consecutive calls to {decision.tool_name!r}",
                )
            continue

        if decision.kind is DecisionKind.HANDOFF:
            gate = services.gate(
                CheckpointLocation.PRE_HANDOFF,
                agent.id,
                {"target": decision.target_agent, "note": decision.note},
            )
            if gate.action == "reject":
                continue

        try:
            route = services.route(agent.id, decision)
        except MasError as exc:
            return abort(type(exc).__name__, str(exc))

        if route.kind == "handoff":
            assert route.payload is not None
            services.emit(agent.id, EventKind.HANDOFF, route.payload.to_dict())
            return AgentResult(
                outcome="handoff",
                target=route.target,
                payload=route.payload,
                events=activation_events(),
            )

        answer = decision.answer
        gate = services.gate(CheckpointLocation.FINAL_REVIEW, agent.id, {"draft": answer})
        if gate.action == "reject":
            continue
        if gate.action == "edit":
            answer = gate.text
        services.emit(agent.id, EventKind.FINAL_ANSWER, {"answer": answer})
        services.remember_final(agent, payload.original_query, answer)
        return AgentResult(outcome="final", answer=answer, events=activation_events())

    return abort("StepLimitExceeded", f"no terminal decision after {limits.max_steps} steps")
