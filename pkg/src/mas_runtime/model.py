"""Core domain types: agents, topologies, trace events, and handoff payloads.

All types are immutable value records; anything that needs to travel between
threads or into a log is converted to plain dicts via its ``to_dict`` method.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class NetworkKind(str, Enum):
    SUPERVISOR = "supervisor"
    SWARM = "swarm"
    HIERARCHICAL = "hierarchical"
    SIE = "sie"


class ControlFlow(str, Enum):
    EXPLICIT = "explicit"
    DYNAMIC = "dynamic"


class HistoryPolicy(str, Enum):
    FULL_TRACE = "full_trace"
    FINAL_RESULTS_ONLY = "final_results_only"


class EventKind(str, Enum):
    USER_QUERY = "user_query"
    REASONING = "reasoning"
    TOOL_CALL = "tool_call"
    TOOL_RESULT = "tool_result"
    HANDOFF = "handoff"
    APPROVAL_REQUEST = "approval_request"
    APPROVAL_DECISION = "approval_decision"
    INTERRUPT = "interrupt"
    FINAL_ANSWER = "final_answer"
    ERROR = "error"


class CheckpointLocation(str, Enum):
    PRE_TOOL_CALL = "pre_tool_call"
    PRE_HANDOFF = "pre_handoff"
    FINAL_REVIEW = "final_review"


class CheckpointMode(str, Enum):
    IN_THE_LOOP = "in_the_loop"
    ON_THE_LOOP = "on_the_loop"


class RunStatus(str, Enum):
    RUNNING = "running"
    AWAITING_APPROVAL = "awaiting_approval"
    INTERRUPTED = "interrupted"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass(frozen=True)
class MemoryConfig:
    """Short-term window budget and long-term recall depth for one agent."""

    window_budget: int = 32
    recall_k: int = 3

    def __post_init__(self):
        if self.window_budget < 0 or self.recall_k < 0:
            raise ValueError("memory budgets must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {"window_budget": self.window_budget, "recall_k": self.recall_k}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MemoryConfig":
        return cls(
            window_budget=int(data.get("window_budget", 32)),
            recall_k=int(data.get("recall_k", 3)),
        )


@dataclass(frozen=True)
class AgentSpec:
    """Identity and wiring of one specialist agent."""

    id: str
    role: str
    engine: str
    tools: tuple[str, ...] = ()
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    is_coordinator: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("agent id must be non-empty")
        if len(set(self.tools)) != len(self.tools):
            raise ValueError(f"agent {self.id!r}: duplicate tool names")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "role": self.role,
            "engine": self.engine,
            "tools": list(self.tools),
            "memory": self.memory.to_dict(),
            "is_coordinator": self.is_coordinator,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AgentSpec":
        return cls(
            id=data["id"],
            role=data.get("role", ""),
            engine=data.get("engine", ""),
            tools=tuple(data.get("tools", ())),
            memory=MemoryConfig.from_dict(data.get("memory", {})),
            is_coordinator=bool(data.get("is_coordinator", False)),
        )


@dataclass(frozen=True)
class HitlCheckpoint:
    """A human checkpoint: where it fires, which agents it covers, and whether it blocks."""

    location: CheckpointLocation
    scope: str = "*"
    mode: CheckpointMode = CheckpointMode.IN_THE_LOOP

    def __post_init__(self):
        object.__setattr__(self, "location", CheckpointLocation(self.location))
        object.__setattr__(self, "mode", CheckpointMode(self.mode))

    def covers(self, agent_id: str) -> bool:
        return self.scope == "*" or self.scope == agent_id

    @property
    def blocking(self) -> bool:
        return self.mode is CheckpointMode.IN_THE_LOOP

    def to_dict(self) -> dict[str, Any]:
        return {"location": self.location.value, "scope": self.scope, "mode": self.mode.value}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HitlCheckpoint":
        return cls(
            location=CheckpointLocation(data["location"]),
            scope=data.get("scope", "*"),
            mode=CheckpointMode(data.get("mode", "in_the_loop")),
        )


@dataclass(frozen=True)
class TopologyGraph:
    """Agents plus the directed handoff edges and policies that govern a run."""

    agents: tuple[AgentSpec, ...]
    edges: tuple[tuple[str, str], ...]
    network_kind: NetworkKind
    control_flow: ControlFlow
    history_policy: HistoryPolicy
    entry_agent: str
    checkpoints: tuple[HitlCheckpoint, ...] = ()
    dataset_bindings: dict[str, str] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "network_kind", NetworkKind(self.network_kind))
        object.__setattr__(self, "control_flow", ControlFlow(self.control_flow))
        object.__setattr__(self, "history_policy", HistoryPolicy(self.history_policy))

    def agent(self, agent_id: str) -> AgentSpec:
        for spec in self.agents:
            if spec.id == agent_id:
                return spec
        raise KeyError(agent_id)

    def agent_ids(self) -> list[str]:
        return [a.id for a in self.agents]

    def out_neighbours(self, agent_id: str) -> list[str]:
        return [dst for src, dst in self.edges if src == agent_id]

    def in_neighbours(self, agent_id: str) -> list[str]:
        return [src for src, dst in self.edges if dst == agent_id]

    def routable_from(self, agent_id: str) -> list[str]:
        """Agents the given agent may hand off to.

        Swarm peers may reach every other declared agent; all other network
        kinds route strictly along declared edges.
        """
        if self.network_kind is NetworkKind.SWARM:
            return [a for a in self.agent_ids() if a != agent_id]
        return self.out_neighbours(agent_id)

    def checkpoints_at(self, location: CheckpointLocation, agent_id: str) -> list[HitlCheckpoint]:
        return [c for c in self.checkpoints if c.location is location and c.covers(agent_id)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "network_kind": self.network_kind.value,
            "control_flow": self.control_flow.value,
            "history_policy": self.history_policy.value,
            "entry_agent": self.entry_agent,
            "agents": [a.to_dict() for a in self.agents],
            "edges": [list(e) for e in self.edges],
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "dataset_bindings": dict(self.dataset_bindings),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TopologyGraph":
        return cls(
            agents=tuple(AgentSpec.from_dict(a) for a in data.get("agents", ())),
            edges=tuple((e[0], e[1]) for e in data.get("edges", ())),
            network_kind=NetworkKind(data["network_kind"]),
            control_flow=ControlFlow(data["control_flow"]),
            history_policy=HistoryPolicy(data["history_policy"]),
            entry_agent=data["entry_agent"],
            checkpoints=tuple(HitlCheckpoint.from_dict(c) for c in data.get("checkpoints", ())),
            dataset_bindings=dict(data.get("dataset_bindings", {})),
            name=data.get("name", ""),
        )


@dataclass(frozen=True)
class TraceEvent:
    """One labelled entry of the append-only run log."""

    seq: int
    run_id: str
    agent_id: str
    kind: EventKind
    payload: dict[str, Any]
    timestamp: int

    def to_dict(self) -> dict[str, Any]:
        # Key order here is the canonical wire order; do not reorder.
        return {
            "seq": self.seq,
            "run_id": self.run_id,
            "agent_id": self.agent_id,
            "kind": self.kind.value,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TraceEvent":
        return cls(
            seq=data["seq"],
            run_id=data["run_id"],
            agent_id=data["agent_id"],
            kind=EventKind(data["kind"]),
            payload=data["payload"],
            timestamp=data["timestamp"],
        )


@dataclass(frozen=True)
class HandoffPayload:
    """What travels with control when one agent hands a task to another.

    ``shared_history`` obeys the topology's history policy; ``prior_finals``
    carries the answers of agents whose activations already concluded, as
    (agent id, answer text) pairs in completion order.
    """

    origin_agent: str
    target_agent: str
    original_query: str
    shared_history: tuple[TraceEvent, ...] = ()
    prior_finals: tuple[tuple[str, str], ...] = ()
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "origin_agent": self.origin_agent,
            "target_agent": self.target_agent,
            "original_query": self.original_query,
            "shared_history": [e.to_dict() for e in self.shared_history],
            "prior_finals": [list(p) for p in self.prior_finals],
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HandoffPayload":
        return cls(
            origin_agent=data["origin_agent"],
            target_agent=data["target_agent"],
            original_query=data["original_query"],
            shared_history=tuple(TraceEvent.from_dict(e) for e in data.get("shared_history", ())),
            prior_finals=tuple((p[0], p[1]) for p in data.get("prior_finals", ())),
            note=data.get("note", ""),
        )


@dataclass(frozen=True)
class Violation:
    """One validation finding; ``severity`` is ``error`` or ``warning``."""

    rule: str
    message: str
    subject: str
    severity: str = "error"

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "message": self.message,
            "subject": self.subject,
            "severity": self.severity,
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def passed(self) -> bool:
        """True when the topology is runnable: no error-class findings."""
        return not self.errors

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}
