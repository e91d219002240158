"""Structural validation of topology graphs against the network-kind rules."""

from __future__ import annotations

from dataclasses import dataclass

from .model import NetworkKind, TopologyGraph, ValidationReport, Violation


@dataclass(frozen=True)
class ValidationLimits:
    # Agents degrade once their toolkit grows into the low teens; the guard
    # is a warning, never fatal, and the threshold is configurable.
    max_tools: int = 12


def validate_topology(graph: TopologyGraph, limits: ValidationLimits | None = None) -> ValidationReport:
    """Check a graph against the rules of its network kind.

    All findings are reported, never thrown. ``error`` findings make the
    topology unrunnable; ``warning`` findings (tool overload) do not.
    """
    limits = limits or ValidationLimits()
    out: list[Violation] = []

    ids = [a.id for a in graph.agents]
    seen: set[str] = set()
    for agent_id in ids:
        if agent_id in seen:
            out.append(Violation("unique_agent_id", f"duplicate agent id {agent_id!r}", agent_id))
        seen.add(agent_id)

    if graph.entry_agent not in seen:
        out.append(
            Violation("entry_agent_exists", f"entry agent {graph.entry_agent!r} not declared", graph.entry_agent)
        )

    for src, dst in graph.edges:
        for endpoint in (src, dst):
            if endpoint not in seen:
                out.append(
                    Violation("edge_endpoint_exists", f"edge ({src} -> {dst}) references unknown agent", endpoint)
                )

    coordinators = [a for a in graph.agents if a.is_coordinator]

    if graph.network_kind is NetworkKind.SUPERVISOR:
        out.extend(_check_supervisor(graph, coordinators))
    elif graph.network_kind is NetworkKind.SWARM:
        for agent in coordinators:
            out.append(
                Violation("swarm_no_coordinator", f"swarm peer {agent.id!r} must not be a coordinator", agent.id)
            )
    elif graph.network_kind is NetworkKind.HIERARCHICAL:
        out.extend(_check_hierarchical(graph))
    elif graph.network_kind is NetworkKind.SIE:
        out.extend(_check_sie(graph, coordinators))

    # Tool flow: nodes that route downward manage handoffs only; leaves own
    # the tools. Swarms have no subordinates, so the rule does not apply.
    if graph.network_kind is not NetworkKind.SWARM:
        for agent in graph.agents:
            if agent.tools and graph.out_neighbours(agent.id):
                out.append(
                    Violation(
                        "tool_flow",
                        f"agent {agent.id!r} has outgoing handoff edges and must own zero tools "
                        f"(owns {len(agent.tools)})",
                        agent.id,
                    )
                )

    for agent in graph.agents:
        if len(agent.tools) > limits.max_tools:
            out.append(
                Violation(
                    "tool_overload",
                    f"agent {agent.id!r} owns {len(agent.tools)} tools, above the "
                    f"{limits.max_tools}-tool degradation guard",
                    agent.id,
                    severity="warning",
                )
            )

    return ValidationReport(violations=tuple(out))


def _check_supervisor(graph: TopologyGraph, coordinators) -> list[Violation]:
    out = []
    if len(coordinators) != 1:
        out.append(
            Violation(
                "supervisor_single_coordinator",
                f"supervisor network needs exactly one coordinator, found {len(coordinators)}",
                ",".join(a.id for a in coordinators) or "-",
            )
        )
        return out
    sup = coordinators[0].id
    for src, dst in graph.edges:
        if sup not in (src, dst):
            out.append(
                Violation(
                    "supervisor_edges_incident",
                    f"edge ({src} -> {dst}) does not touch the supervisor; leaf-to-leaf handoffs are not allowed",
                    f"{src}->{dst}",
                )
            )
    return out


def _check_hierarchical(graph: TopologyGraph) -> list[Violation]:
    out = []
    ids = set(graph.agent_ids())
    roots = [a for a in ids if not graph.in_neighbours(a)]
    if len(roots) != 1:
        out.append(
            Violation(
                "hierarchical_single_root",
                f"tier structure needs exactly one root, found {len(roots)}",
                ",".join(sorted(roots)) or "-",
            )
        )

    # Cycle check by iterated leaf removal over the declared edges.
    remaining = set(ids)
    edges = {(s, d) for s, d in graph.edges if s in ids and d in ids}
    changed = True
    while changed:
        changed = False
        for node in list(remaining):
            if not any(s == node for s, _ in edges):
                remaining.discard(node)
                edges = {(s, d) for s, d in edges if d != node}
                changed = True
    if remaining:
        out.append(
            Violation("hierarchical_acyclic", "handoff edges contain a cycle", ",".join(sorted(remaining)))
        )

    if len(roots) == 1:
        reachable = {roots[0]}
        frontier = [roots[0]]
        while frontier:
            node = frontier.pop()
            for nxt in graph.out_neighbours(node):
                if nxt not in reachable:
                    reachable.add(nxt)
                    frontier.append(nxt)
        for orphan in sorted(ids - reachable):
            out.append(
                Violation("hierarchical_connected", f"agent {orphan!r} is not reachable from the root", orphan)
            )
    return out


def _check_sie(graph: TopologyGraph, coordinators) -> list[Violation]:
    out = []
    if len(coordinators) != 1:
        out.append(
            Violation(
                "sie_single_coordinator",
                f"single-information-environment needs exactly one coordinator, found {len(coordinators)}",
                ",".join(a.id for a in coordinators) or "-",
            )
        )
    coordinator_ids = {a.id for a in coordinators}

    ids = set(graph.agent_ids())
    for agent_id in graph.dataset_bindings:
        if agent_id not in ids:
            out.append(
                Violation("sie_dataset_binding", f"dataset binding references unknown agent {agent_id!r}", agent_id)
            )

    # Data specialists are the leaves; each must own exactly one dataset.
    # Interface agents that only route (non-coordinator, with out-edges) stay
    # unbound, which is what puts a chat front-end ahead of the coordinator.
    for agent in graph.agents:
        if agent.id in coordinator_ids or graph.out_neighbours(agent.id):
            continue
        if agent.id not in graph.dataset_bindings:
            out.append(
                Violation(
                    "sie_dataset_binding",
                    f"specialist {agent.id!r} must be bound to exactly one dataset",
                    agent.id,
                )
            )

    by_dataset: dict[str, list[str]] = {}
    for agent_id, dataset_id in graph.dataset_bindings.items():
        by_dataset.setdefault(dataset_id, []).append(agent_id)
    for dataset_id, owners in sorted(by_dataset.items()):
        if len(owners) > 1:
            out.append(
                Violation(
                    "sie_unique_dataset",
                    f"dataset {dataset_id!r} is bound to {len(owners)} agents; specialisation must be unique",
                    ",".join(sorted(owners)),
                )
            )
    return out
