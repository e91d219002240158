"""Pluggable decision-makers: scripted rule tables and a remote chat endpoint.

An engine turns one prompt context into exactly one structured Decision.
Scripted engines are pure functions of the context, which is what makes runs
reproducible and replayable; the remote engine adapts any chat-completions
style HTTP endpoint.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol, Sequence

import httpx

from .errors import DecisionParseError, EngineUnavailable, IllegalDecision, UnknownKind
from .memory import MemoryRecord
from .model import AgentSpec, EventKind, TraceEvent
from .tools import ToolSpec


class DecisionKind(str, Enum):
    TOOL_CALL = "tool_call"
    HANDOFF = "handoff"
    FINAL = "final"


@dataclass(frozen=True)
class Decision:
    """Structured output of one reasoning step."""

    kind: DecisionKind
    tool_name: str = ""
    tool_args: dict[str, Any] = field(default_factory=dict)
    target_agent: str = ""
    note: str = ""
    answer: str = ""
    rationale: str = ""

    def __post_init__(self):
        if self.kind is DecisionKind.TOOL_CALL:
            if not self.tool_name or self.target_agent or self.answer:
                raise ValueError("tool_call decision must set tool fields only")
        elif self.kind is DecisionKind.HANDOFF:
            if not self.target_agent or self.tool_name or self.tool_args or self.answer:
                raise ValueError("handoff decision must set target fields only")
        elif self.kind is DecisionKind.FINAL:
            if self.tool_name or self.tool_args or self.target_agent or self.note:
                raise ValueError("final decision must set the answer only")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": self.kind.value}
        if self.kind is DecisionKind.TOOL_CALL:
            out["tool_name"] = self.tool_name
            out["tool_args"] = self.tool_args
        elif self.kind is DecisionKind.HANDOFF:
            out["target_agent"] = self.target_agent
            if self.note:
                out["note"] = self.note
        else:
            out["answer"] = self.answer
        if self.rationale:
            out["rationale"] = self.rationale
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Decision":
        if "type" not in data:
            raise DecisionParseError("decision object lacks a type field")
        try:
            kind = DecisionKind(data["type"])
        except ValueError:
            raise UnknownKind(f"unknown decision type {data['type']!r}") from None
        return cls(
            kind=kind,
            tool_name=data.get("tool_name", ""),
            tool_args=dict(data.get("tool_args", {})),
            target_agent=data.get("target_agent", ""),
            note=data.get("note", ""),
            answer=data.get("answer", ""),
            rationale=data.get("rationale", ""),
        )


@dataclass(frozen=True)
class PromptContext:
    """Everything one reasoning step may condition on."""

    agent: AgentSpec
    query: str
    window: tuple[TraceEvent, ...] = ()
    retrieved: tuple[MemoryRecord, ...] = ()
    available_tools: tuple[ToolSpec, ...] = ()
    routable_agents: tuple[str, ...] = ()
    prior_finals: tuple[tuple[str, str], ...] = ()


class Engine(Protocol):
    def decide(self, ctx: PromptContext) -> Decision: ...


def decide(engine: Engine, ctx: PromptContext) -> Decision:
    """Run one reasoning step and enforce decision legality.

    Engines may only call tools they were offered and hand off to agents in
    the routable set; anything else surfaces as IllegalDecision rather than
    being silently repaired.
    """
    decision = engine.decide(ctx)
    if decision.kind is DecisionKind.HANDOFF and decision.target_agent not in ctx.routable_agents:
        raise IllegalDecision(
            f"agent {ctx.agent.id!r} named handoff target {decision.target_agent!r}, "
            f"routable: {list(ctx.routable_agents)}"
        )
    if decision.kind is DecisionKind.TOOL_CALL:
        offered = {spec.name for spec in ctx.available_tools}
        if decision.tool_name not in offered:
            raise IllegalDecision(
                f"agent {ctx.agent.id!r} named tool {decision.tool_name!r}, offered: {sorted(offered)}"
            )
    return decision


# --- decision text parsing -------------------------------------------------

def parse_decision(text: str) -> Decision:
    """Extract the first balanced JSON object from a completion and parse it.

    Engines often wrap the object in prose; the scan tolerates any leading
    and trailing text but insists on one well-formed decision object.
    """
    for candidate in _balanced_objects(text):
        try:
            data = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(data, dict):
            return Decision.from_dict(data)
    raise DecisionParseError(f"no decision object found in {text[:200]!r}")


def _balanced_objects(text: str):
    """Candidate regions from every opening brace, innermost included."""
    for start, ch in enumerate(text):
        if ch != "{":
            continue
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            c = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif c == "\\":
                    escaped = True
                elif c == '"':
                    in_string = False
                continue
            if c == '"':
                in_string = True
            elif c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    yield text[start : i + 1]
                    break


# --- scripted engine ---------------------------------------------------------

def _window_results(window: Sequence[TraceEvent]) -> list[tuple[str, str]]:
    """(tool name, content) pairs of every tool_result in the window."""
    out = []
    for event in window:
        if event.kind is EventKind.TOOL_RESULT:
            out.append((event.payload.get("tool", ""), event.payload.get("content", "")))
    return out


def last_observation(window: Sequence[TraceEvent]) -> str:
    """Most recent observable outcome: a tool result or a rejection reason."""
    for event in reversed(window):
        if event.kind is EventKind.TOOL_RESULT:
            return event.payload.get("content", "")
        if event.kind is EventKind.APPROVAL_DECISION and event.payload.get("decision") == "reject":
            return f"rejected: {event.payload.get('reason', '')}"
    return ""


def _query_field(query: str, name: str) -> str:
    prefix = name.lower() + ":"
    for line in query.splitlines():
        if line.lower().startswith(prefix):
            return line[len(prefix):].strip()
    return ""


_PLACEHOLDER_RE = re.compile(r"\{(query|last_result|finals|step)\}|\{(query|match|result|final):([^{}]+)\}")


def render_template(template: str, ctx: PromptContext) -> str:
    """Substitute context values into a rule template string.

    Placeholders: {query}, {query:field}, {match:regex}, {last_result},
    {result:tool}, {final:agent}, {final:agent:field}, {finals}, {step}.
    """

    def _sub(match: re.Match) -> str:
        simple, tagged, arg = match.group(1), match.group(2), match.group(3)
        if simple == "query":
            return ctx.query
        if simple == "last_result":
            return last_observation(ctx.window)
        if simple == "finals":
            return "\n".join(f"{agent}: {answer}" for agent, answer in ctx.prior_finals)
        if simple == "step":
            steps = sum(
                1 for e in ctx.window if e.kind is EventKind.REASONING and e.agent_id == ctx.agent.id
            )
            return str(steps)
        if tagged == "query":
            return _query_field(ctx.query, arg)
        if tagged == "match":
            found = re.search(arg, ctx.query)
            return found.group(0) if found else ""
        if tagged == "result":
            for tool, content in reversed(_window_results(ctx.window)):
                if tool == arg:
                    return content
            return ""
        if tagged == "final":
            agent, _, fld = arg.partition(":")
            answer = next((a for src, a in reversed(ctx.prior_finals) if src == agent), "")
            return _query_field(answer, fld) if fld else answer
        return match.group(0)

    return _PLACEHOLDER_RE.sub(_sub, template)


@dataclass(frozen=True)
class RuleWhen:
    """Conjunctive matcher over the prompt context; empty matches everything."""

    query_has: tuple[str, ...] = ()
    query_has_any: tuple[str, ...] = ()
    query_lacks: tuple[str, ...] = ()
    has_result_of: str = ""
    lacks_result_of: str = ""
    last_result_has: str = ""
    has_final_from: str = ""
    lacks_final_from: str = ""

    def matches(self, ctx: PromptContext) -> bool:
        query = ctx.query.lower()
        if any(needle.lower() not in query for needle in self.query_has):
            return False
        if self.query_has_any and not any(needle.lower() in query for needle in self.query_has_any):
            return False
        if any(needle.lower() in query for needle in self.query_lacks):
            return False
        seen_tools = {tool for tool, _ in _window_results(ctx.window)}
        if self.has_result_of and self.has_result_of not in seen_tools:
            return False
        if self.lacks_result_of and self.lacks_result_of in seen_tools:
            return False
        if self.last_result_has and self.last_result_has not in last_observation(ctx.window):
            return False
        finals = {agent for agent, _ in ctx.prior_finals}
        if self.has_final_from and self.has_final_from not in finals:
            return False
        if self.lacks_final_from and self.lacks_final_from in finals:
            return False
        return True

    @property
    def is_default(self) -> bool:
        return self == RuleWhen()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RuleWhen":
        return cls(
            query_has=tuple(data.get("query_has", ())),
            query_has_any=tuple(data.get("query_has_any", ())),
            query_lacks=tuple(data.get("query_lacks", ())),
            has_result_of=data.get("has_result_of", ""),
            lacks_result_of=data.get("lacks_result_of", ""),
            last_result_has=data.get("last_result_has", ""),
            has_final_from=data.get("has_final_from", ""),
            lacks_final_from=data.get("lacks_final_from", ""),
        )


@dataclass(frozen=True)
class ScriptRule:
    when: RuleWhen
    then: dict[str, Any]  # decision template, same keys as the wire format

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScriptRule":
        return cls(when=RuleWhen.from_dict(data.get("when", {})), then=dict(data["then"]))


class ScriptedEngine:
    """Deterministic rule-table engine: first matching rule wins.

    Rule templates may reference the context through {placeholders}; see
    render_template. A default (unconditional) rule is mandatory so every
    context resolves to a decision.
    """

    def __init__(self, rules: Sequence[ScriptRule]):
        if not rules:
            raise ValueError("scripted engine needs at least one rule")
        if not any(rule.when.is_default for rule in rules):
            raise ValueError("scripted engine needs a default (unconditional) rule")
        for rule in rules:
            kind = rule.then.get("type")
            if kind not in (k.value for k in DecisionKind):
                raise ValueError(f"rule template has unknown decision type {kind!r}")
        self.rules = list(rules)

    def decide(self, ctx: PromptContext) -> Decision:
        for rule in self.rules:
            if rule.when.matches(ctx):
                return self._render(rule.then, ctx)
        raise AssertionError("unreachable: default rule always matches")

    @staticmethod
    def _render(template: dict[str, Any], ctx: PromptContext) -> Decision:
        rendered: dict[str, Any] = {}
        for key, value in template.items():
            if isinstance(value, str):
                rendered[key] = render_template(value, ctx)
            elif key == "tool_args" and isinstance(value, dict):
                rendered[key] = {
                    k: render_template(v, ctx) if isinstance(v, str) else v for k, v in value.items()
                }
            else:
                rendered[key] = value
        return Decision.from_dict(rendered)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScriptedEngine":
        return cls([ScriptRule.from_dict(rule) for rule in data.get("rules", ())])


# --- remote engine -----------------------------------------------------------

_DECISION_FORMAT = """Respond with exactly one JSON object and nothing else.
To call a tool:      {"type": "tool_call", "tool_name": "<name>", "tool_args": {...}, "rationale": "..."}
To hand off:         {"type": "handoff", "target_agent": "<agent id>", "note": "...", "rationale": "..."}
To answer and stop:  {"type": "final", "answer": "...", "rationale": "..."}"""


@dataclass(frozen=True)
class RemoteConfig:
    url: str
    model: str
    api_key: str = ""
    temperature: float = 0.0
    max_attempts: int = 3
    backoff_base: float = 0.5
    timeout: float = 30.0

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None, **overrides) -> "RemoteConfig":
        env = dict(os.environ if env is None else env)
        settings = {
            "url": env.get("MAS_ENGINE_URL", ""),
            "model": env.get("MAS_ENGINE_MODEL", ""),
            "api_key": env.get("MAS_ENGINE_KEY", ""),
        }
        settings.update(overrides)
        if not settings["url"]:
            raise EngineUnavailable("MAS_ENGINE_URL is not configured")
        return cls(**settings)


def render_messages(ctx: PromptContext) -> list[dict[str, str]]:
    """Chat-message rendering of a prompt context."""
    system = f"{ctx.agent.role}\n\n{_DECISION_FORMAT}"
    parts = [f"Query:\n{ctx.query}"]
    if ctx.prior_finals:
        finals = "\n".join(f"- {agent}: {answer}" for agent, answer in ctx.prior_finals)
        parts.append(f"Answers already produced:\n{finals}")
    if ctx.window:
        lines = [f"[{e.seq}] {e.agent_id} {e.kind.value}: {json.dumps(e.payload, ensure_ascii=False)}" for e in ctx.window]
        parts.append("History:\n" + "\n".join(lines))
    if ctx.retrieved:
        recalled = "\n".join(f"- {record.id}: {record.text}" for record in ctx.retrieved)
        parts.append(f"Recalled notes:\n{recalled}")
    if ctx.available_tools:
        tools = "\n".join(f"- {spec.name}: {spec.description}" for spec in ctx.available_tools)
        parts.append(f"Tools you may call:\n{tools}")
    if ctx.routable_agents:
        parts.append("Agents you may hand off to: " + ", ".join(ctx.routable_agents))
    else:
        parts.append("You cannot hand off; finish with a final answer.")
    return [
        {"role": "system", "content": system},
        {"role": "user", "content": "\n\n".join(parts)},
    ]


class RemoteEngine:
    """Chat-completions HTTP client with bounded retry and backoff."""

    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None, sleep=time.sleep):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)
        self._sleep = sleep
        self.retries_used = 0

    def decide(self, ctx: PromptContext) -> Decision:
        body = {
            "model": self.config.model,
            "messages": render_messages(ctx),
            "temperature": self.config.temperature,
        }
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.config.max_attempts):
            if attempt:
                self._sleep(self.config.backoff_base * (2 ** (attempt - 1)))
                self.retries_used += 1
            try:
                response = self._client.post(self.config.url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = EngineUnavailable(f"server error {response.status_code}")
                continue
            if response.status_code != 200:
                raise EngineUnavailable(f"endpoint rejected request: {response.status_code} {response.text[:200]}")
            text = self._completion_text(response)
            try:
                return parse_decision(text)
            except DecisionParseError as exc:
                raise type(exc)(f"{exc} (raw completion: {text[:500]!r})") from None
        raise EngineUnavailable(
            f"engine unreachable after {self.config.max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _completion_text(response: httpx.Response) -> str:
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise EngineUnavailable("endpoint returned a non chat-completions body") from None
