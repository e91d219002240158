"""Drives whole runs over a topology: routing, handoffs, suspension, replay.

The controller executes a run as a deterministic state machine over its event
log. Live runs append fresh events; resumed and replayed runs re-drive the
same code path against a tape of recorded events, substituting recorded
decisions and approvals for live calls and verifying every regenerated event
against the record. That one mechanism gives crash-safe resumption and
byte-level replay auditing for free.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from .engines import Decision, DecisionKind, Engine, PromptContext
from .engines import decide as legal_decide
from .errors import Divergence, EngineUnavailable, HopBudget, RoutingError, UnknownTool
from .events import events_equivalent
from .history import apply_history_policy
from .hitl import ApprovalGateway, ApprovalRequest
from .memory import MemoryRecord, MemoryStore
from .model import (
    AgentSpec,
    CheckpointLocation,
    ControlFlow,
    EventKind,
    HandoffPayload,
    NetworkKind,
    RunStatus,
    TopologyGraph,
    TraceEvent,
)
from .react import GateDecision, InterruptRun, LoopLimits, Route, SuspendRun, run_react_loop
from .runstore import RunStore
from .tools import ToolRegistry, ToolResult, ToolSpec

TERMINAL_STATUSES = (RunStatus.COMPLETED, RunStatus.FAILED, RunStatus.INTERRUPTED)


def now_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 8
    max_repeated_action: int = 2
    hop_budget: int = 16
    recall_k: int = 3

    @property
    def loop(self) -> LoopLimits:
        return LoopLimits(max_steps=self.max_steps, max_repeated_action=self.max_repeated_action)

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_steps": self.max_steps,
            "max_repeated_action": self.max_repeated_action,
            "hop_budget": self.hop_budget,
            "recall_k": self.recall_k,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunLimits":
        base = cls()
        return cls(
            max_steps=int(data.get("max_steps", base.max_steps)),
            max_repeated_action=int(data.get("max_repeated_action", base.max_repeated_action)),
            hop_budget=int(data.get("hop_budget", base.hop_budget)),
            recall_k=int(data.get("recall_k", base.recall_k)),
        )


def next_hop(
    topology: TopologyGraph,
    current_agent: str,
    decision: Decision,
    return_stack: Sequence[str] = (),
) -> str | None:
    """Where control goes after a terminal decision; None ends the run.

    Explicit flow follows the graph: a single out-edge wins over whatever the
    engine named, multiple out-edges require the named target to match one.
    Dynamic flow accepts the engine's target when it is routable, and sends
    completed delegations back to the delegator on the return stack.
    """
    if decision.kind is DecisionKind.FINAL:
        if topology.control_flow is ControlFlow.DYNAMIC:
            return return_stack[-1] if return_stack else None
        outs = topology.out_neighbours(current_agent)
        if not outs:
            return None
        if len(outs) == 1:
            return outs[0]
        raise RoutingError(
            f"agent {current_agent!r} completed its stage but has {len(outs)} out-edges; ambiguous advance"
        )
    if decision.kind is not DecisionKind.HANDOFF:
        raise RoutingError(f"decision kind {decision.kind.value!r} does not route")
    if topology.control_flow is ControlFlow.EXPLICIT:
        outs = topology.out_neighbours(current_agent)
        if not outs:
            raise RoutingError(f"agent {current_agent!r} has no out-edge to follow")
        if len(outs) == 1:
            return outs[0]
        if decision.target_agent in outs:
            return decision.target_agent
        raise RoutingError(
            f"named target {decision.target_agent!r} matches none of the out-edges of {current_agent!r}"
        )
    routable = topology.routable_from(current_agent)
    if decision.target_agent in routable:
        return decision.target_agent
    raise RoutingError(f"target {decision.target_agent!r} is not routable from {current_agent!r}")


def run_metrics(trace: Sequence[TraceEvent]) -> dict[str, Any]:
    by_agent = Counter(e.agent_id for e in trace if e.kind is EventKind.REASONING)
    return {
        "decide_calls": sum(by_agent.values()),
        "tool_calls": sum(1 for e in trace if e.kind is EventKind.TOOL_CALL),
        "handoffs": sum(1 for e in trace if e.kind is EventKind.HANDOFF),
        "decide_calls_by_agent": dict(by_agent),
    }


@dataclass
class RunOutcome:
    run_id: str
    status: RunStatus
    answer: str | None
    trace: list[TraceEvent]
    metrics: dict[str, Any] = field(default_factory=dict)


@dataclass
class ReplayReport:
    ok: bool
    status: RunStatus | None = None
    divergence: dict[str, Any] | None = None
    error: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "status": self.status.value if self.status else None,
            "divergence": self.divergence,
            "error": self.error,
        }


class RunController:
    """Executes one run; implements the ActivationServices the loop needs."""

    def __init__(
        self,
        run_id: str,
        topology: TopologyGraph,
        engines: dict[str, Engine],
        registry: ToolRegistry,
        limits: RunLimits | None = None,
        store: RunStore | None = None,
        gateway: ApprovalGateway | None = None,
        memory_stores: dict[str, MemoryStore] | None = None,
        clock=now_ms,
        tape: Sequence[TraceEvent] | None = None,
        injected_decisions: dict[str, dict[str, Any]] | None = None,
        replay_mode: bool = False,
        snapshot_extra: dict[str, Any] | None = None,
    ):
        self.run_id = run_id
        self.topology = topology
        self.limits = limits or RunLimits()
        self.status = RunStatus.RUNNING
        self.answer: str | None = None
        self.query = ""
        self.current_agent = topology.entry_agent
        self.return_stack: list[str] = []
        self.hop_count = 0
        self.pending_request: ApprovalRequest | None = None
        self._engines = engines
        self._registry = registry
        self._store = store
        self._gateway = gateway
        self._memory = memory_stores if memory_stores is not None else {}
        self._clock = clock
        self._trace: list[TraceEvent] = []
        self._tape = list(tape or ())
        self._cursor = 0
        self._injected = dict(injected_decisions or {})
        self._replay_mode = replay_mode
        self._snapshot_extra = dict(snapshot_extra or {})
        self._interrupt_requested = False
        self._created_at = clock()

    # -- lifecycle ------------------------------------------------------------

    def drive(self, query: str) -> RunStatus:
        """Run until a terminal status or a blocking checkpoint suspends us."""
        self.query = query
        self.status = RunStatus.RUNNING
        payload: HandoffPayload | None = None
        try:
            self.emit("user", EventKind.USER_QUERY, {"query": query})
            payload = apply_history_policy(
                self._trace, self.topology.history_policy, "user", self.topology.entry_agent, query
            )
            self.current_agent = self.topology.entry_agent
            while True:
                self.check_interrupt()
                agent = self.topology.agent(self.current_agent)
                result = run_react_loop(agent, payload, self.limits.loop, self)
                if result.outcome == "handoff":
                    assert result.payload is not None
                    self.current_agent = result.target
                    payload = result.payload
                    continue
                if result.outcome == "final":
                    self.answer = result.answer
                    self._finish(RunStatus.COMPLETED)
                else:
                    self._finish(RunStatus.FAILED)
                return self.status
        except SuspendRun:
            self.status = RunStatus.AWAITING_APPROVAL
            self._persist_snapshot()
            return self.status
        except InterruptRun:
            self.emit("operator", EventKind.INTERRUPT, {"reason": "operator"})
            self._finish(RunStatus.INTERRUPTED)
            return self.status
        except Divergence:
            # Re-execution failed to regenerate the record; the log itself is
            # the evidence, so append nothing and let the caller see it.
            self.status = RunStatus.FAILED
            self._persist_snapshot()
            raise
        except Exception as exc:
            # Defensive: never leave a run wedged in RUNNING.
            try:
                self.emit("runtime", EventKind.ERROR, {"code": type(exc).__name__, "message": str(exc)})
            except Exception:
                pass
            self._finish(RunStatus.FAILED)
            raise

    def request_interrupt(self) -> None:
        self._interrupt_requested = True

    def outcome(self) -> RunOutcome:
        return RunOutcome(
            run_id=self.run_id,
            status=self.status,
            answer=self.answer if self.status is RunStatus.COMPLETED else None,
            trace=list(self._trace),
            metrics=run_metrics(self._trace),
        )

    def tape_consumed(self) -> bool:
        return self._cursor >= len(self._tape)

    def remaining_tape(self) -> list[TraceEvent]:
        return self._tape[self._cursor:]

    def _finish(self, status: RunStatus) -> None:
        self.status = status
        self.pending_request = None
        self._persist_snapshot()

    def snapshot(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "status": self.status.value,
            "answer": self.answer,
            "query": self.query,
            "current_agent": self.current_agent,
            "hop_count": self.hop_count,
            "return_stack": list(self.return_stack),
            "pending": self.pending_request.to_dict() if self.pending_request else None,
            "last_seq": len(self._trace) - 1,
            "created_at": self._created_at,
            "updated_at": self._clock(),
            **self._snapshot_extra,
        }

    def _persist_snapshot(self) -> None:
        if self._store is not None:
            self._store.write_state(self.run_id, self.snapshot())

    # -- activation services ----------------------------------------------------

    def trace(self) -> Sequence[TraceEvent]:
        return self._trace

    def emit(self, agent_id: str, kind: EventKind, payload: dict[str, Any]) -> TraceEvent:
        seq = len(self._trace)
        if self._cursor < len(self._tape):
            recorded = self._tape[self._cursor]
            generated = TraceEvent(seq, self.run_id, agent_id, kind, payload, recorded.timestamp)
            if not events_equivalent(generated, recorded):
                raise Divergence(recorded.seq, recorded.to_dict(), generated.to_dict())
            self._cursor += 1
            self._trace.append(recorded)
            return recorded
        event = TraceEvent(seq, self.run_id, agent_id, kind, payload, self._clock())
        self._trace.append(event)
        if self._store is not None:
            self._store.append_event(self.run_id, event)
        return event

    def decide(self, ctx: PromptContext) -> Decision:
        if self._cursor < len(self._tape):
            recorded = self._tape[self._cursor]
            if recorded.kind is not EventKind.REASONING or recorded.agent_id != ctx.agent.id:
                raise Divergence(
                    recorded.seq,
                    recorded.to_dict(),
                    {"expected_kind": "reasoning", "agent_id": ctx.agent.id},
                )
            return Decision.from_dict(recorded.payload["decision"])
        engine = self._engines.get(ctx.agent.engine)
        if engine is None:
            raise EngineUnavailable(f"engine binding {ctx.agent.engine!r} is not registered")
        return legal_decide(engine, ctx)

    def exec_tool(self, agent_id: str, name: str, args: dict[str, Any]) -> ToolResult:
        if self._cursor < len(self._tape):
            recorded = self._tape[self._cursor]
            if recorded.kind is EventKind.TOOL_RESULT and self._side_effecting(name):
                # Never re-run a side-effecting tool from the record; adopt
                # the recorded observation instead.
                return ToolResult(
                    ok=bool(recorded.payload.get("ok")),
                    content=recorded.payload.get("content", ""),
                    data=recorded.payload.get("data"),
                )
        return self._registry.invoke(name, args)

    def _side_effecting(self, name: str) -> bool:
        try:
            return self._registry.spec(name).side_effecting
        except UnknownTool:
            return False

    def gate(self, location: CheckpointLocation, agent_id: str, pending: dict[str, Any]) -> GateDecision:
        matching = self.topology.checkpoints_at(location, agent_id)
        blocking = next((c for c in matching if c.blocking), None)
        for checkpoint in matching:
            if not checkpoint.blocking:
                self.emit(
                    agent_id,
                    EventKind.APPROVAL_REQUEST,
                    {
                        "request_id": f"{self.run_id}:obs{len(self._trace)}",
                        "location": location.value,
                        "mode": "on_the_loop",
                        "blocking": False,
                        "pending": pending,
                    },
                )
        if blocking is None:
            return GateDecision(action="proceed")

        request_id = f"{self.run_id}:req{len(self._trace)}"
        self.emit(
            agent_id,
            EventKind.APPROVAL_REQUEST,
            {
                "request_id": request_id,
                "location": location.value,
                "mode": "in_the_loop",
                "blocking": True,
                "pending": pending,
            },
        )

        if self._cursor < len(self._tape):
            recorded = self._tape[self._cursor]
            if (
                recorded.kind is EventKind.APPROVAL_DECISION
                and recorded.payload.get("request_id") == request_id
            ):
                event = self.emit("operator", EventKind.APPROVAL_DECISION, recorded.payload)
                return self._gate_decision(event.payload)
            if recorded.kind is EventKind.INTERRUPT:
                raise InterruptRun()
            raise Divergence(
                recorded.seq, recorded.to_dict(), {"expected_kind": "approval_decision", "request_id": request_id}
            )

        injected = self._injected.pop(request_id, None)
        if injected is not None:
            payload = self._decision_payload(request_id, pending, injected)
            self.emit("operator", EventKind.APPROVAL_DECISION, payload)
            return self._gate_decision(payload)

        if not self._replay_mode:
            request = ApprovalRequest(
                request_id=request_id,
                run_id=self.run_id,
                agent_id=agent_id,
                location=location,
                pending=pending,
                created_at=self._clock(),
            )
            self.pending_request = request
            if self._gateway is not None:
                self._gateway.register(request)
        raise SuspendRun(request_id)

    @staticmethod
    def _decision_payload(request_id: str, pending: dict[str, Any], injected: dict[str, Any]) -> dict[str, Any]:
        decision = injected.get("decision", "")
        payload: dict[str, Any] = {"request_id": request_id, "decision": decision}
        if decision == "reject":
            payload["reason"] = injected.get("reason", "")
        elif decision == "edit":
            payload["original"] = pending.get("draft", "")
            payload["edited"] = injected.get("text", "")
        return payload

    @staticmethod
    def _gate_decision(payload: dict[str, Any]) -> GateDecision:
        decision = payload.get("decision", "")
        if decision == "approve":
            return GateDecision(action="approve")
        if decision == "reject":
            return GateDecision(action="reject", reason=payload.get("reason", ""))
        if decision == "edit":
            return GateDecision(action="edit", text=payload.get("edited", ""))
        raise Divergence(-1, {"decision": "approve|reject|edit"}, payload)

    def route(self, agent_id: str, decision: Decision) -> Route:
        target = next_hop(self.topology, agent_id, decision, self.return_stack)
        if target is None:
            return Route(kind="final")
        if self.hop_count + 1 > self.limits.hop_budget:
            raise HopBudget(f"hop budget of {self.limits.hop_budget} handoffs exhausted")
        self.hop_count += 1
        payload = apply_history_policy(
            self._trace, self.topology.history_policy, agent_id, target, self.query
        )
        if decision.kind is DecisionKind.FINAL:
            # A completed activation travels onward as a handoff that carries
            # its answer; the run-level final_answer stays unique.
            payload = replace(payload, prior_finals=payload.prior_finals + ((agent_id, decision.answer),))
            if self.return_stack and self.return_stack[-1] == target:
                self.return_stack.pop()
        else:
            payload = replace(payload, note=decision.note)
            if (
                self.topology.control_flow is ControlFlow.DYNAMIC
                and self.topology.network_kind is not NetworkKind.SWARM
            ):
                self.return_stack.append(agent_id)
        return Route(kind="handoff", target=target, payload=payload)

    def recall(self, agent: AgentSpec, query_text: str) -> tuple[MemoryRecord, ...]:
        store = self._memory.get(agent.id)
        if store is None or len(store) == 0 or agent.memory.recall_k == 0:
            return ()
        ranked = store.recall(query_text, agent.memory.recall_k)
        return tuple(record for record, _ in ranked)

    def tool_specs(self, agent: AgentSpec) -> tuple[ToolSpec, ...]:
        return tuple(self._registry.specs(list(agent.tools)))

    def routable(self, agent_id: str) -> tuple[str, ...]:
        return tuple(self.topology.routable_from(agent_id))

    def remember_final(self, agent: AgentSpec, query: str, answer: str) -> None:
        store = self._memory.setdefault(agent.id, MemoryStore())
        record_id = f"{self.run_id}:{agent.id}:{len(self._trace)}"
        store.add_text(record_id, f"{query}\n{answer}", meta={"agent": agent.id, "run": self.run_id})

    def check_interrupt(self) -> None:
        if self._cursor < len(self._tape):
            if self._tape[self._cursor].kind is EventKind.INTERRUPT:
                raise InterruptRun()
            return
        if self._interrupt_requested:
            raise InterruptRun()


def replay_events(
    events: Sequence[TraceEvent],
    topology: TopologyGraph,
    engines: dict[str, Engine],
    registry: ToolRegistry,
    limits: RunLimits | None = None,
) -> ReplayReport:
    """Re-execute a recorded log and verify it regenerates itself.

    Recorded decisions and approvals substitute for live engine and operator
    calls; deterministic tools are re-executed so a tampered observation
    surfaces as a divergence at its own sequence number.
    """
    events = list(events)
    if not events:
        return ReplayReport(ok=False, error="empty event log")
    if events[0].kind is not EventKind.USER_QUERY:
        return ReplayReport(ok=False, error="log must begin with a user_query event")
    controller = RunController(
        run_id=events[0].run_id,
        topology=topology,
        engines=engines,
        registry=registry,
        limits=limits,
        tape=events,
        replay_mode=True,
    )
    try:
        controller.drive(events[0].payload.get("query", ""))
    except Divergence as exc:
        return ReplayReport(
            ok=False,
            divergence={"seq": exc.seq, "expected": exc.expected, "actual": exc.actual},
        )
    if not controller.tape_consumed():
        trailing = controller.remaining_tape()[0]
        return ReplayReport(
            ok=False,
            divergence={"seq": trailing.seq, "expected": None, "actual": trailing.to_dict()},
            error="recorded events continue beyond the regenerated run",
        )
    return ReplayReport(ok=True, status=controller.status)
