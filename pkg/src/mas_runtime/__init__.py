"""Multi-agent orchestration runtime: ReAct agents wired into supervisor,
swarm, hierarchical, and single-information-environment topologies, with
human checkpoints, an event-sourced run log, and deterministic replay."""

from .engines import Decision, DecisionKind, PromptContext, RemoteConfig, RemoteEngine, ScriptedEngine
from .history import apply_history_policy
from .model import (
    AgentSpec,
    ControlFlow,
    EventKind,
    HandoffPayload,
    HistoryPolicy,
    HitlCheckpoint,
    MemoryConfig,
    NetworkKind,
    RunStatus,
    TopologyGraph,
    TraceEvent,
    ValidationReport,
)
from .orchestrator import ReplayReport, RunController, RunLimits, RunOutcome, next_hop, replay_events
from .runtime import RunManager
from .topology import ValidationLimits, validate_topology

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "ControlFlow",
    "Decision",
    "DecisionKind",
    "EventKind",
    "HandoffPayload",
    "HistoryPolicy",
    "HitlCheckpoint",
    "MemoryConfig",
    "NetworkKind",
    "PromptContext",
    "RemoteConfig",
    "RemoteEngine",
    "ReplayReport",
    "RunController",
    "RunLimits",
    "RunManager",
    "RunOutcome",
    "RunStatus",
    "ScriptedEngine",
    "TopologyGraph",
    "TraceEvent",
    "ValidationLimits",
    "ValidationReport",
    "apply_history_policy",
    "next_hop",
    "replay_events",
    "validate_topology",
]
