import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { groupByAgent, traceHtml, traceRows } from "../src/render.js";
import { RunSession, followRun } from "../src/session.js";
import type { TraceEvent } from "../src/types.js";
import { type ServiceHandle, startService, waitFor } from "./server.js";

const EMAIL_QUERY = [
  "subject: Refund for double charge",
  "body: I was charged twice on my last invoice and would like a refund.",
  "customer: CRM-001",
].join("\n");

let service: ServiceHandle;
let api: ApiClient;

beforeAll(async () => {
  service = await startService();
  api = new ApiClient(service.base);
}, 30_000);

afterAll(async () => {
  await service.stop();
});

async function startReviewRun(): Promise<string> {
  const { run_id } = await api.createRun({ topology_name: "cs3", query: EMAIL_QUERY });
  await waitFor(async () => {
    const run = await api.getRun(run_id);
    return run.status === "awaiting_approval" ? run : null;
  });
  return run_id;
}

describe("approval round trip", () => {
  it("edits a silver draft into the gold final answer, original preserved", async () => {
    const runId = await startReviewRun();
    const approvals = (await api.listApprovals()).approvals.filter((a) => a.run_id === runId);
    expect(approvals).toHaveLength(1);
    const request = approvals[0]!;
    expect(request.location).toBe("final_review");
    const silver = String((request.pending as Record<string, unknown>)["draft"]);
    expect(silver.startsWith("Dear Alice Hartley")).toBe(true);

    const gold = `${silver}\n\nPS: your refund reference is RF-42.`;
    const ack = await api.decide(request.request_id, { decision: "edit", text: gold });
    expect(ack.run_status).toBe("completed");

    const run = await api.getRun(runId);
    expect(run.status).toBe("completed");
    expect(run.answer).toBe(gold);

    const events = (await api.getEvents(runId)).events;
    const finals = events.filter((e) => e.kind === "final_answer");
    expect(finals).toHaveLength(1);
    expect((finals[0]!.payload as Record<string, unknown>)["answer"]).toBe(gold);
    const decisions = events.filter((e) => e.kind === "approval_decision");
    expect(decisions).toHaveLength(1);
    const payload = decisions[0]!.payload as Record<string, unknown>;
    expect(payload["decision"]).toBe("edit");
    expect(payload["original"]).toBe(silver);
    expect(payload["edited"]).toBe(gold);
  }, 30_000);

  it("absorbs a duplicate decision as already-decided (409)", async () => {
    const runId = await startReviewRun();
    const request = (await api.listApprovals()).approvals.find((a) => a.run_id === runId)!;
    await api.decide(request.request_id, { decision: "approve" });
    let conflict: ApiError | null = null;
    try {
      await api.decide(request.request_id, { decision: "approve" });
    } catch (error) {
      conflict = error as ApiError;
    }
    expect(conflict).not.toBeNull();
    expect(conflict!.status).toBe(409);
  }, 30_000);

  it("a full reload renders a trace identical to GET events", async () => {
    const runId = await startReviewRun();
    const live = followRun(api, runId);
    const request = await waitFor(async () => {
      const open = (await api.listApprovals()).approvals.filter((a) => a.run_id === runId);
      return open.length ? open[0]! : null;
    });
    await api.decide(request.request_id, { decision: "approve" });
    await live.done;

    const reloaded = (await api.getEvents(runId)).events;
    expect(traceHtml(live.session.events)).toBe(traceHtml(reloaded));
    expect(live.session.events.map((e) => e.seq)).toEqual(reloaded.map((e) => e.seq));
  }, 30_000);
});

describe("streaming", () => {
  it("keeps seq order with no duplicates across a forced disconnect", async () => {
    const runId = await startReviewRun();
    const seen: number[] = [];
    const live = followRun(api, runId, (event) => seen.push(event.seq));

    // let some events arrive, then drop the connection mid-run
    await waitFor(async () => (seen.length >= 3 ? true : null));
    live.disconnect();

    const request = await waitFor(async () => {
      const open = (await api.listApprovals()).approvals.filter((a) => a.run_id === runId);
      return open.length ? open[0]! : null;
    });
    await api.decide(request.request_id, { decision: "approve" });
    await live.done;

    const recorded = (await api.getEvents(runId)).events.map((e) => e.seq);
    expect(seen).toEqual(recorded);
    const unique = new Set(seen);
    expect(unique.size).toBe(seen.length);
    for (let i = 1; i < seen.length; i++) expect(seen[i]!).toBeGreaterThan(seen[i - 1]!);
  }, 30_000);

  it("renders a 404 state for unknown runs", async () => {
    let failure: ApiError | null = null;
    try {
      await api.getRun("does-not-exist");
    } catch (error) {
      failure = error as ApiError;
    }
    expect(failure?.status).toBe(404);
  });
});

describe("interrupts", () => {
  it("interrupt voids the open approval and terminal runs reject interrupts", async () => {
    const runId = await startReviewRun();
    const before = (await api.listApprovals()).approvals.filter((a) => a.run_id === runId);
    expect(before).toHaveLength(1);
    const ack = await api.interrupt(runId);
    expect(ack.status).toBe("interrupted");
    const after = (await api.listApprovals()).approvals.filter((a) => a.run_id === runId);
    expect(after).toHaveLength(0);
    let conflict: ApiError | null = null;
    try {
      await api.interrupt(runId);
    } catch (error) {
      conflict = error as ApiError;
    }
    expect(conflict?.status).toBe(409);
  }, 30_000);
});

describe("render model", () => {
  const sample: TraceEvent[] = [
    { seq: 0, run_id: "r", agent_id: "user", kind: "user_query", payload: { query: "q" }, timestamp: 1 },
    { seq: 1, run_id: "r", agent_id: "triage", kind: "reasoning", payload: { decision: { type: "handoff" } }, timestamp: 2 },
    { seq: 2, run_id: "r", agent_id: "triage", kind: "handoff", payload: { origin_agent: "triage", target_agent: "retrieval" }, timestamp: 3 },
    { seq: 3, run_id: "r", agent_id: "retrieval", kind: "final_answer", payload: { answer: "a" }, timestamp: 4 },
  ];

  it("groups consecutive rows by agent and styles kinds", () => {
    const groups = groupByAgent(traceRows(sample));
    expect(groups.map((g) => g.agent)).toEqual(["user", "triage", "retrieval"]);
    expect(groups[1]!.rows).toHaveLength(2);
    expect(traceRows(sample).map((r) => r.css)).toEqual([
      "row-query",
      "row-reasoning",
      "row-handoff",
      "row-final",
    ]);
  });

  it("escapes html in summaries", () => {
    const wicked: TraceEvent = {
      seq: 0,
      run_id: "r",
      agent_id: "a'<b>",
      kind: "final_answer",
      payload: { answer: "<script>alert(1)</script>" },
      timestamp: 1,
    };
    const html = traceHtml([wicked]);
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });

  it("session drops replayed events and keeps the cursor monotonic", () => {
    const session = new RunSession("r");
    const mk = (seq: number): TraceEvent => ({
      seq,
      run_id: "r",
      agent_id: "a",
      kind: "reasoning",
      payload: {},
      timestamp: seq,
    });
    expect(session.apply(mk(0))).toBe(true);
    expect(session.apply(mk(1))).toBe(true);
    expect(session.apply(mk(0))).toBe(false);
    expect(session.apply(mk(1))).toBe(false);
    expect(session.apply(mk(2))).toBe(true);
    expect(session.cursor).toBe(2);
    expect(session.duplicatesDropped).toBe(2);
    expect(session.events.map((e) => e.seq)).toEqual([0, 1, 2]);
  });
});
