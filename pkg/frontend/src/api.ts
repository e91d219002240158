// Thin fetch client over the run service endpoints.

import type { ApprovalRequest, Decision, EventPage, RunListEntry, RunSummary } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`api error ${status}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const text = await response.text();
  const body = text ? JSON.parse(text) : null;
  if (!response.ok) throw new ApiError(response.status, body);
  return body as T;
}

export class ApiClient {
  constructor(public base: string) {
    this.base = base.replace(/\/$/, "");
  }

  listRuns(): Promise<{ runs: RunListEntry[] }> {
    return request(`${this.base}/runs`);
  }

  getRun(runId: string): Promise<RunSummary> {
    return request(`${this.base}/runs/${runId}`);
  }

  getEvents(runId: string, after = -1): Promise<EventPage> {
    return request(`${this.base}/runs/${runId}/events?after=${after}`);
  }

  listApprovals(): Promise<{ approvals: ApprovalRequest[] }> {
    return request(`${this.base}/approvals`);
  }

  createRun(body: Record<string, unknown>): Promise<{ run_id: string }> {
    return request(`${this.base}/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  decide(requestId: string, decision: Decision): Promise<{ request_id: string; run_status: string }> {
    return request(`${this.base}/approvals/${requestId}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(decision),
    });
  }

  interrupt(runId: string): Promise<{ run_id: string; status: string }> {
    return request(`${this.base}/runs/${runId}/interrupt`, { method: "POST" });
  }

  streamUrl(runId: string, after = -1): string {
    return `${this.base}/runs/${runId}/events/stream?after=${after}`;
  }
}
