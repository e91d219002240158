// Pure render model: trace rows grouped by agent with kind-specific styling.
//
// Kept free of DOM access so a full page reload (or a test) rebuilds the
// identical view from the same events.

import type { ApprovalRequest, EventKind, TraceEvent } from "./types.js";

export interface TraceRow {
  seq: number;
  agent: string;
  kind: EventKind;
  css: string;
  summary: string;
}

const KIND_CSS: Record<EventKind, string> = {
  user_query: "row-query",
  reasoning: "row-reasoning",
  tool_call: "row-tool",
  tool_result: "row-tool-result",
  handoff: "row-handoff",
  approval_request: "row-approval",
  approval_decision: "row-approval",
  interrupt: "row-interrupt",
  final_answer: "row-final",
  error: "row-error",
};

function short(value: unknown, limit = 160): string {
  const text = typeof value === "string" ? value : JSON.stringify(value);
  return text.length > limit ? `${text.slice(0, limit)}…` : text;
}

export function summarize(event: TraceEvent): string {
  const p = event.payload as Record<string, any>;
  switch (event.kind) {
    case "user_query":
      return short(p["query"]);
    case "reasoning": {
      const decision = p["decision"] ?? {};
      const rationale = decision.rationale ? ` — ${decision.rationale}` : "";
      return `${decision.type}${rationale}`;
    }
    case "tool_call":
      return `${p["tool"]}(${short(p["args"], 80)})`;
    case "tool_result":
      return `${p["ok"] ? "ok" : "failed"}: ${short(p["content"])}`;
    case "handoff":
      return `${p["origin_agent"]} → ${p["target_agent"]}${p["note"] ? ` (${short(p["note"], 60)})` : ""}`;
    case "approval_request":
      return `${p["location"]} ${p["mode"]}: ${short(p["pending"], 100)}`;
    case "approval_decision":
      return `${p["decision"]}${p["reason"] ? `: ${p["reason"]}` : ""}${p["edited"] ? ` → ${short(p["edited"], 80)}` : ""}`;
    case "interrupt":
      return short(p["reason"] ?? "interrupt");
    case "final_answer":
      return short(p["answer"], 400);
    case "error":
      return `${p["code"]}: ${short(p["message"])}`;
  }
}

export function traceRows(events: TraceEvent[]): TraceRow[] {
  return events.map((event) => ({
    seq: event.seq,
    agent: event.agent_id,
    kind: event.kind,
    css: KIND_CSS[event.kind],
    summary: summarize(event),
  }));
}

/** Rows grouped into consecutive per-agent activations. */
export function groupByAgent(rows: TraceRow[]): { agent: string; rows: TraceRow[] }[] {
  const groups: { agent: string; rows: TraceRow[] }[] = [];
  for (const row of rows) {
    const last = groups[groups.length - 1];
    if (last && last.agent === row.agent) last.rows.push(row);
    else groups.push({ agent: row.agent, rows: [row] });
  }
  return groups;
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function traceHtml(events: TraceEvent[]): string {
  const groups = groupByAgent(traceRows(events));
  const blocks = groups.map((group) => {
    const rows = group.rows
      .map(
        (row) =>
          `<div class="trace-row ${row.css}" data-seq="${row.seq}">` +
          `<span class="seq">${row.seq}</span>` +
          `<span class="kind">${row.kind}</span>` +
          `<span class="summary">${escapeHtml(row.summary)}</span></div>`,
      )
      .join("");
    return `<section class="agent-block"><h3>${escapeHtml(group.agent)}</h3>${rows}</section>`;
  });
  return blocks.join("");
}

export function approvalHtml(request: ApprovalRequest): string {
  const pending = escapeHtml(JSON.stringify(request.pending, null, 2));
  const draft = (request.pending as Record<string, unknown>)["draft"];
  const editor =
    request.location === "final_review"
      ? `<textarea class="draft-editor" data-request="${request.request_id}">${escapeHtml(String(draft ?? ""))}</textarea>`
      : `<pre>${pending}</pre>`;
  return (
    `<article class="approval" data-request="${request.request_id}">` +
    `<header>${request.location} · run ${request.run_id} · ${escapeHtml(request.agent_id)}</header>` +
    editor +
    `<footer>` +
    `<button data-action="approve" data-request="${request.request_id}">approve</button>` +
    `<button data-action="reject" data-request="${request.request_id}">reject</button>` +
    (request.location === "final_review"
      ? `<button data-action="edit" data-request="${request.request_id}">send edited</button>`
      : "") +
    `</footer></article>`
  );
}

export function statusBanner(status: string): string {
  return `<div class="banner banner-${status}">${status.replaceAll("_", " ")}</div>`;
}
